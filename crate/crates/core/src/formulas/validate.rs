use serde::Serialize;

use super::Formula;
use crate::error::{Error, Result};
use crate::structures::Signature;

/// Outcome of a successful validation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Free first-order variables in order of first occurrence.
    pub free_vars: Vec<String>,
    /// Relation binders whose name coincides with a signature symbol.
    pub shadowed: Vec<String>,
}

/// Checks every atom against the enclosing binders and the signature.
/// Free first-order variables are permitted and listed in the report.
pub fn validate(f: &Formula, sig: &Signature) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    walk(f, sig, &mut Vec::new(), &mut report)?;
    report.free_vars = f.free_fo_vars();
    Ok(report)
}

/// Like [`validate`], additionally rejecting free first-order variables.
pub fn validate_sentence(f: &Formula, sig: &Signature) -> Result<ValidationReport> {
    let report = validate(f, sig)?;
    match report.free_vars.first() {
        Some(v) => Err(Error::UnboundVariable(v.clone())),
        None => Ok(report),
    }
}

fn walk(f: &Formula, sig: &Signature, scope: &mut Vec<(String, usize)>, report: &mut ValidationReport) -> Result<()> {
    match f {
        Formula::Atom { rel, args } => {
            let expected = match scope.iter().rev().find(|(n, _)| n == rel) {
                Some((_, k)) => *k,
                None => sig.arity(rel).ok_or_else(|| Error::UnknownSymbol(rel.clone()))?,
            };
            if expected != args.len() {
                return Err(Error::ArityMismatch {
                    symbol: rel.clone(),
                    expected,
                    found: args.len(),
                });
            }
            Ok(())
        }
        Formula::Eq(..) => Ok(()),
        Formula::Not(s) | Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => walk(s, sig, scope, report),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
            walk(l, sig, scope, report)?;
            walk(r, sig, scope, report)
        }
        Formula::ExistsSo { var, arity, body } | Formula::ForallSo { var, arity, body } => {
            if *arity == 0 {
                return Err(Error::InvalidParameter(format!("relation variable `{var}` has arity 0")));
            }
            if sig.arity(var).is_some() && !report.shadowed.contains(var) {
                report.shadowed.push(var.clone());
            }
            scope.push((var.clone(), *arity));
            let r = walk(body, sig, scope, report);
            scope.pop();
            r
        }
    }
}
