//! Property tests for the structural invariants of each module.

use std::collections::BTreeSet;

use proptest::prelude::*;

use crate::asdim::grid_cover;
use crate::chains::{f_components, ComponentAutomaton};
use crate::covers::{
    block_cover, certify, reduce_cover_with, scale_schedule, tower_decomposition, verify_dad_cover, verify_with, Cover, PipelineOptions,
    VerifyOptions,
};
use crate::group::ball_size;
use crate::oracle::{replay, FiniteQuotientModel};
use crate::systems::{admissible_words, restrict, word_string, ClopenSet, Slope, System};
use crate::{Element, Subset};

fn residue_set(sys: &System, depth: u32, mask: u64) -> ClopenSet {
    let n = sys.depth_moduli(depth).unwrap()[0];
    let cells: Vec<Vec<i64>> = (0..n).filter(|i| mask >> (i % 64) & 1 == 1).map(|i| vec![i]).collect();
    sys.residue_set(depth, &cells).unwrap()
}

fn coords(dim: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-50i64..50, dim)
}

fn golden_set(len: usize, mask: u64, offset: i64) -> ClopenSet {
    let words: Vec<String> = admissible_words(&Slope::golden(), len)
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, w)| word_string(w))
        .collect();
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    System::golden().cylinder(offset, &refs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law((a, b) in (1usize..4).prop_flat_map(|d| (coords(d), coords(d)))) {
        let dim = a.len();
        let (a, b) = (Element::new(a).unwrap(), Element::new(b).unwrap());
        prop_assert_eq!(a.dim(), dim);
        prop_assert!(a.add(&a.inverse()).is_identity());
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.sub(&b).norm(), a.distance(&b));
        prop_assert!(a.add(&b).norm() <= a.norm() + b.norm());
    }

    #[test]
    fn balls_are_fs_and_sized(dim in 1usize..4, r in 0u64..5, s in 0u64..4) {
        let b = Subset::ball(dim, r);
        prop_assert!(b.is_fs());
        prop_assert_eq!(b.elements().unwrap().len() as u128, ball_size(dim, r));
        prop_assert_eq!(b.diam().unwrap(), 2 * r);
        prop_assert_eq!(b.product(&Subset::ball(dim, s)).unwrap(), Subset::ball(dim, r + s));
        prop_assert_eq!(b.power(s + 1).unwrap(), Subset::ball(dim, r * (s + 1)));
    }

    #[test]
    fn symmetrize_gives_fs(pts in prop::collection::vec(coords(2), 1..6)) {
        let s = Subset::from_coords(2, &pts).unwrap().symmetrize();
        prop_assert!(s.is_fs());
        for e in s.elements().unwrap() {
            prop_assert!(s.contains(&e.inverse()));
        }
    }

    #[test]
    fn grid_colors_cover_and_repeat(d in 1usize..4, r in 1u64..5, p in coords(3)) {
        let g = grid_cover(d, r).unwrap();
        let p = &p[..d];
        let c = g.color_of(p);
        prop_assert!(c.is_some());
        let q: Vec<i64> = p.iter().zip(&g.period).map(|(a, m)| a + m).collect();
        prop_assert_eq!(g.color_of(&q), c);
    }

    #[test]
    fn sets_are_normalized(depth in 1u32..7, extra in 0u32..3, mask in any::<u64>()) {
        let sys = System::odometer(2, 1);
        let a = residue_set(&sys, depth, mask);
        let fine = sys.refine(&a, depth + extra).unwrap();
        prop_assert!(sys.same_set(&a, &fine).unwrap());
        prop_assert_eq!(sys.normalize(&fine).unwrap(), sys.normalize(&a).unwrap());
        sys.check_set(&a).unwrap();
    }

    #[test]
    fn odometer_generator_adds_one(p in 2i64..5, depth in 1u32..4, cell in 0i64..64) {
        let sys = System::odometer(p, 1);
        let n = p.pow(depth);
        let c = cell % n;
        let a = sys.residue_set(depth, &[vec![c]]).unwrap();
        let moved = sys.translate(&a, &[1]).unwrap();
        let expect = sys.residue_set(depth, &[vec![(c + 1) % n]]).unwrap();
        prop_assert!(sys.same_set(&moved, &expect).unwrap());
        let model = FiniteQuotientModel::odometer(p, 1, depth).unwrap();
        prop_assert_eq!(model.act(&[c], &[1]), vec![(c + 1) % n]);
    }

    #[test]
    fn word_model_matches_translate(g in -6i64..6, x in 0i64..30) {
        // the singleton cylinder of the point at x moves to x - g
        let model = FiniteQuotientModel::fibonacci(200, 20).unwrap();
        let FiniteQuotientModel::Word { word, .. } = &model else { unreachable!() };
        let x = x + 20;
        let w = word_string(&word[x as usize..x as usize + 6]);
        let sys = System::golden();
        let a = sys.cylinder(0, &[w.as_str()]).unwrap();
        let moved = sys.translate(&a, &[g]).unwrap();
        let y = model.act(&[x], &[g])[0];
        let ClopenSet::Cylinder(c) = &moved else { unreachable!() };
        prop_assert_eq!(c.contains_point(word, y), Some(true));
    }

    #[test]
    fn sturmian_complexity(len in 1usize..60, tail in prop::collection::vec(1u32..4, 1..3)) {
        let slope = Slope { prefix: vec![], tail };
        prop_assert_eq!(admissible_words(&slope, len).len(), len + 1);
    }

    #[test]
    fn translate_round_trip(len in 1usize..6, mask in any::<u64>(), off in -4i64..4, g in -9i64..9) {
        let sys = System::golden();
        let a = golden_set(len, mask, off);
        let back = sys.translate(&sys.translate(&a, &[g]).unwrap(), &[-g]).unwrap();
        prop_assert!(sys.same_set(&a, &back).unwrap());
    }

    #[test]
    fn restricted_domains(depth in 1u32..6, mask in any::<u64>(), g in -9i64..9, h in -9i64..9) {
        let sys = System::odometer(2, 1);
        let y = residue_set(&sys, depth, mask);
        let rs = restrict(&sys, &y).unwrap();
        prop_assert!(sys.same_set(&rs.domain(&[0]).unwrap(), &y).unwrap());
        let expect = sys.intersection(&y, &sys.translate(&y, &[-g]).unwrap()).unwrap();
        prop_assert!(sys.same_set(&rs.domain(&[g]).unwrap(), &expect).unwrap());
        // composing partial maps lands inside the composite map
        let a = rs.act(&rs.act(&y, &[h]).unwrap(), &[g]).unwrap();
        let b = rs.act(&y, &[g + h]).unwrap();
        prop_assert!(sys.is_subset(&a, &b).unwrap());
    }

    #[test]
    fn labels_contain_identity_and_close(depth in 1u32..6, mask in any::<u64>(), k in 0u64..3) {
        let sys = System::odometer(2, 1);
        let b = residue_set(&sys, depth, mask);
        let comps = f_components(&sys, &b, &Subset::ball(1, k)).unwrap();
        if comps.is_unbounded() || matches!(comps, ComponentAutomaton::Empty) {
            return Ok(());
        }
        let n = 1i64 << depth;
        let member = |x: i64| mask >> (x.rem_euclid(n) % 64) & 1 == 1;
        for (cell, labels) in comps.cell_labels().unwrap() {
            let labels: BTreeSet<i64> = labels.unwrap().into_iter().map(|v| v[0]).collect();
            let c: i64 = cell.parse().unwrap();
            prop_assert!(labels.contains(&0));
            for &m in &labels {
                for f in -(k as i64)..=k as i64 {
                    if member(c + m + f) {
                        prop_assert!(labels.contains(&(m + f)));
                    }
                }
            }
        }
    }

    #[test]
    fn certificates_account_for_every_cell(depth in 3u32..7, mask in any::<u64>(), r in 1u64..3, big_r in 0u64..8) {
        let sys = System::odometer(2, 1);
        let a = residue_set(&sys, depth, mask);
        let b = sys.complement(&a).unwrap();
        let cover = Cover::on(sys.clone(), sys.full(), vec![a, b], Subset::ball(1, r), Subset::ball(1, big_r)).unwrap();
        let cert = verify_dad_cover(&cover).unwrap();
        if cert.passed() {
            let cells: u64 = cert.witnesses.iter().map(|w| w.cells).sum();
            prop_assert_eq!(cells as u128, 1u128 << depth);
            prop_assert!(cert.counterexample.is_none());
        } else {
            prop_assert!(cert.counterexample.is_some());
        }
        prop_assert!(replay(&cert).unwrap().ok());
        let compact = verify_with(&cover, VerifyOptions::compact()).unwrap();
        prop_assert_eq!(compact.verdict, cert.verdict);
    }

    #[test]
    fn towers_separate_and_cover(depth in 2u32..7, mask in any::<u64>(), k in 1u64..3) {
        let sys = System::odometer(2, 1);
        let u = residue_set(&sys, depth, mask);
        let f = Subset::ball(1, k);
        let comps = f_components(&sys, &u, &f).unwrap();
        if comps.is_unbounded() {
            return Ok(());
        }
        let s = Subset::ball(1, 1 << depth);
        let td = tower_decomposition(&sys, &u, &f, &s).unwrap();
        prop_assert!(td.check_separated().unwrap());
        prop_assert!(sys.same_set(&td.union().unwrap(), &u).unwrap());
        for t in 0..td.towers.len() {
            let fibers = td.fibers(t).unwrap();
            let labels: BTreeSet<&Vec<i64>> = fibers.iter().map(|x| &x.0).collect();
            prop_assert_eq!(labels.len(), fibers.len());
            for i in 0..fibers.len() {
                for j in i + 1..fibers.len() {
                    prop_assert!(sys.intersection(&fibers[i].1, &fibers[j].1).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn schedule_is_monotone(dim in 1usize..3, k in 0u64..4, d in 0usize..3) {
        let s = scale_schedule(d, &Subset::ball(dim, k)).unwrap();
        prop_assert_eq!(s.f.len(), d + 1);
        for i in 0..=d {
            prop_assert!(s.f[i].is_fs());
            if i < d {
                prop_assert!(s.f[i].is_subset(&s.f[i + 1]).unwrap());
                prop_assert_eq!(&s.f[i + 1], &s.g[i].power(4).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pipeline_yields_d_plus_one_colors(k in 0u64..4, colors in 2usize..4) {
        let sys = System::odometer(2, 1);
        let f0 = Subset::ball(1, k);
        let sched = scale_schedule(colors - 1, &f0).unwrap();
        let input = certify(block_cover(&sys, 10, colors, &sched.f[colors - 1]).unwrap(), VerifyOptions::compact()).unwrap();
        let out = reduce_cover_with(&input, &f0, PipelineOptions { witnesses: false }).unwrap();
        prop_assert_eq!(out.cover().color_count(), 2);
        prop_assert!(out.certificate().all_passed());
        prop_assert!(verify_dad_cover(out.cover()).unwrap().passed());
    }
}
