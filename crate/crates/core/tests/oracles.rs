//! Library routines against small, independently written reference
//! computations.

use cklab_core::af_core::{AfCore, LevelElement};
use cklab_core::fd_bimodule::{topological_freeness_finite, PartialMapOnSpectrum};
use cklab_core::matrix_subshift::{
    admissible_words, brute_force_condition_i, check_condition_i, forced_states,
    isolated_periodic_points, ZeroOneMatrix,
};
use cklab_core::path_rep::{GeneratorModel, TruncatedRep};
use cklab_core::sparse::{norm_estimate, SparseOperator};
use cklab_core::uniqueness_lab::CylinderRep;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn m(rows: &[&[i64]]) -> ZeroOneMatrix {
    ZeroOneMatrix::new(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn references() -> Vec<ZeroOneMatrix> {
    vec![
        m(&[&[1, 1], &[1, 1]]),
        m(&[&[1, 1], &[1, 0]]),
        m(&[&[1, 1, 1], &[1, 0, 0], &[0, 1, 0]]),
        m(&[&[1, 0], &[0, 1]]),
        m(&[&[0, 1], &[1, 0]]),
        m(&[&[1, 1, 0], &[0, 0, 1], &[1, 0, 0]]),
    ]
}

/// `1ᵀ A^(k-1) 1` by repeated integer matrix-vector products.
fn word_count(a: &ZeroOneMatrix, k: usize) -> usize {
    let n = a.n();
    let mut v = vec![1usize; n];
    for _ in 1..k {
        v = (0..n)
            .map(|i| (0..n).filter(|&j| a.allows(i, j)).map(|j| v[j]).sum())
            .collect();
    }
    v.iter().sum()
}

#[test]
fn admissible_word_counts_match_matrix_powers() {
    for a in references() {
        for k in 1..=7 {
            assert_eq!(
                admissible_words(&a, k).unwrap().len(),
                word_count(&a, k),
                "{a} k={k}"
            );
        }
    }
}

#[test]
fn enumeration_counts_match_inclusion_exclusion() {
    // Matrices with no zero row and no zero column.
    fn binom(n: i64, k: i64) -> i64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for n in 2..=4usize {
        let expected: i64 = (0..=n as i64)
            .map(|k| {
                (-1i64).pow(k as u32)
                    * binom(n as i64, k)
                    * ((1i64 << (n as i64 - k)) - 1).pow(n as u32)
            })
            .sum();
        assert_eq!(
            ZeroOneMatrix::enumerate_valid(n).len() as i64,
            expected,
            "n={n}"
        );
    }
}

#[test]
fn forced_states_are_those_with_unbranched_orbits() {
    for a in references() {
        let forced = forced_states(&a);
        for s in 0..a.n() {
            // n steps visit every state the orbit can reach.
            let mut cur = s;
            let mut unbranched = true;
            for _ in 0..=a.n() {
                let next: Vec<usize> = (0..a.n()).filter(|&j| a.allows(cur, j)).collect();
                if next.len() != 1 {
                    unbranched = false;
                    break;
                }
                cur = next[0];
            }
            assert_eq!(forced.contains(&s), unbranched, "{a} state {s}");
        }
    }
}

#[test]
fn isolated_periodic_points_match_brute_force() {
    // A periodic block is isolated iff its orbit never branches.
    for a in references() {
        for p in 1..=4 {
            let mut expected: Vec<Vec<usize>> = admissible_words(&a, p)
                .unwrap()
                .into_iter()
                .filter(|w| {
                    let s = w.symbols();
                    a.allows(s[p - 1], s[0]) && s.iter().all(|&x| a.out_degree(x) == 1)
                })
                .map(|w| w.symbols().to_vec())
                .collect();
            let mut got: Vec<Vec<usize>> = isolated_periodic_points(&a, p)
                .iter()
                .map(|w| w.symbols().to_vec())
                .collect();
            expected.sort();
            got.sort();
            assert_eq!(got, expected, "{a} p={p}");
        }
    }
}

#[test]
fn verdict_witnesses_are_admissible_and_closed() {
    for a in references() {
        let v = check_condition_i(&a);
        assert_eq!(
            v.holds,
            brute_force_condition_i(&a, 2 * a.n() + 1).unwrap().holds
        );
        if let Some(w) = &v.witness {
            let cycle = w.cycle.clone();
            let (first, last) = (cycle.first().unwrap(), cycle.last().unwrap());
            assert!(a.allows(last, first), "{a}: witness cycle does not close");
            assert!(cycle.symbols().iter().all(|&s| a.out_degree(s) == 1));
        }
    }
}

#[test]
fn bratteli_dimensions_match_transposed_powers() {
    for a in references() {
        let dims = AfCore::new(a.clone()).bratteli_dims(6);
        let mut v = vec![1usize; a.n()];
        for k in 1..=6 {
            assert_eq!(dims.at(k), v.as_slice(), "{a} k={k}");
            assert_eq!(
                dims.algebra_dimension(k),
                v.iter().map(|x| x * x).sum::<usize>()
            );
            v = (0..a.n())
                .map(|j| (0..a.n()).filter(|&i| a.allows(i, j)).map(|i| v[i]).sum())
                .collect();
        }
    }
}

#[test]
fn alpha_of_unit_is_a_projection_with_n_weighted_trace() {
    for a in references() {
        let core = AfCore::new(a.clone());
        for k in 1..=3 {
            let p = core.alpha(&core.identity(k).unwrap());
            assert!(p.multiply(&p).unwrap().distance(&p).unwrap() <= 1e-12);
            assert!(p.adjoint().distance(&p).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn level_operators_multiply_like_matrix_units() {
    let a = m(&[&[1, 1], &[1, 0]]);
    let rep = TruncatedRep::build(&a, 6).unwrap();
    let core = AfCore::new(a.clone());
    let gens = core.generators(2).unwrap();
    for x in &gens {
        for y in &gens {
            let symbolic = rep
                .level_element_to_operator(&x.multiply(y).unwrap())
                .unwrap();
            let numeric = rep
                .level_element_to_operator(x)
                .unwrap()
                .mul(&rep.level_element_to_operator(y).unwrap())
                .unwrap();
            assert!(symbolic.sub(&numeric).unwrap().max_abs() <= 1e-12);
        }
    }
}

fn dense_norm(op: &SparseOperator) -> f64 {
    let d: DMatrix<Complex64> = op.to_dense();
    d.singular_values().iter().copied().fold(0.0, f64::max)
}

#[test]
fn norm_estimates_match_dense_singular_values() {
    for a in references() {
        let rep = TruncatedRep::build(&a, 5).unwrap();
        let core = AfCore::new(a.clone());
        let mut ops = vec![rep.generator(0).clone(), rep.range_projection(a.n() - 1)];
        let x: LevelElement = core
            .generators(1)
            .unwrap()
            .into_iter()
            .fold(LevelElement::zero(1), |acc, g| {
                acc.add(&g.scale(Complex64::new(0.3, -0.7))).unwrap()
            });
        ops.push(rep.level_element_to_operator(&x).unwrap());
        ops.push(
            rep.generator(0)
                .add(&rep.generator(1).scale(Complex64::new(0.0, 2.0)))
                .unwrap(),
        );
        for op in ops {
            let exact = dense_norm(&op);
            let est = norm_estimate(&op).unwrap();
            assert!(
                (exact - est).abs() <= 1e-8 * exact.max(1.0),
                "{a}: {exact} vs {est}"
            );
        }
    }
}

#[test]
fn cylinder_model_satisfies_all_but_the_source_relations() {
    for a in references().into_iter().take(3) {
        let rep = CylinderRep::build(&a, 5).unwrap();
        for (label, op) in rep.relation_operators() {
            let source = (1..=a.n()).any(|i| label.starts_with(&format!("S{i}*S{i} =")));
            if !source {
                assert!(op.max_abs() <= 1e-12, "{a}: {label}");
            }
        }
    }
}

#[test]
fn finite_freeness_matches_cycle_search() {
    for count in 1..=5 {
        for h in PartialMapOnSpectrum::enumerate_all(count) {
            let has_cycle = (0..count).any(|t| (1..=count).any(|p| h.iterate(t, p) == Some(t)));
            assert_eq!(topological_freeness_finite(&h, count).free, !has_cycle);
        }
    }
}

#[test]
fn partial_injection_counts() {
    // sum_k C(n,k)^2 k!
    for (count, expected) in [(1, 2), (2, 7), (3, 34), (4, 209), (5, 1546)] {
        assert_eq!(PartialMapOnSpectrum::enumerate_all(count).len(), expected);
    }
}
