use rand::Rng;

use so_lab::gen::rng;
use so_lab::ultra::Ultrafilter;

// Every ultrafilter on up to 12 indices built from principal factors.
fn filters(max: usize) -> Vec<Ultrafilter> {
    let mut out = Vec::new();
    for m in 1..=max {
        for i in 0..m {
            out.push(Ultrafilter::principal(m, i).unwrap());
        }
    }
    let base: Vec<Ultrafilter> = out.clone();
    for f in &base {
        for g in &base {
            if f.size() * g.size() <= max {
                out.push(Ultrafilter::product(f, g).unwrap());
            }
        }
    }
    out
}

fn check_axioms(u: &Ultrafilter, pairs: impl Iterator<Item = (u64, u64)>) {
    let full = u.full_mask();
    assert!(!u.contains(0), "{u} contains the empty set");
    assert!(u.contains(full), "{u} misses the index set");
    for (x, y) in pairs {
        let (x, y) = (x & full, y & full);
        // filter: closed under intersection and supersets
        if u.contains(x) && u.contains(y) {
            assert!(u.contains(x & y), "{u}: {x:b} & {y:b}");
        }
        if u.contains(x) {
            assert!(u.contains(x | y), "{u}: superset of {x:b}");
        }
        // ultra: a set or its complement, never both
        assert!(u.contains(x) != u.contains(full & !x), "{u}: {x:b}");
    }
}

#[test]
fn ultrafilter_axioms_up_to_twelve_indices() {
    let mut r = rng(3);
    for u in filters(12) {
        let m = u.size();
        if m <= 6 {
            let sets = 1u64 << m;
            check_axioms(&u, (0..sets).flat_map(|x| (0..sets).map(move |y| (x, y))));
        } else {
            let pairs: Vec<(u64, u64)> = (0..20_000).map(|_| (r.gen(), r.gen())).collect();
            check_axioms(&u, pairs.into_iter());
            for x in 0..1u64 << m {
                assert!(u.contains(x) != u.contains(u.full_mask() & !x));
            }
        }
    }
}

#[test]
fn principal_filters_are_generated_by_their_index() {
    for u in filters(12) {
        let i0 = u.principal_index();
        for x in 0..1u64 << u.size() {
            assert_eq!(u.contains(x), x >> i0 & 1 == 1, "{u} on {x:b}");
        }
    }
}

// The defining condition, evaluated directly on a set of pairs.
fn product_member(f: &Ultrafilter, g: &Ultrafilter, pairs: &[(usize, usize)]) -> bool {
    let columns = (0..g.size()).filter(|&j| f.contains_set(pairs.iter().filter(|p| p.1 == j).map(|p| p.0)));
    g.contains_set(columns)
}

#[test]
fn product_membership_matches_the_definition_on_all_subsets() {
    for i in 0..3 {
        for j in 0..3 {
            let f = Ultrafilter::principal(3, i).unwrap();
            let g = Ultrafilter::principal(3, j).unwrap();
            let fg = Ultrafilter::product(&f, &g).unwrap();
            let mut members = 0;
            for x in 0..1u64 << 9 {
                let pairs: Vec<(usize, usize)> = (0..9).filter(|b| x >> b & 1 == 1).map(|b| (b / 3, b % 3)).collect();
                let expected = product_member(&f, &g, &pairs);
                assert_eq!(fg.contains(x), expected, "{fg} on {x:09b}");
                members += expected as usize;
            }
            assert_eq!(members, 256);
        }
    }
}
