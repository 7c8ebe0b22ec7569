mod common;

use proptest::prelude::*;

use coprime_squares::arith::{gcd, min_squares};
use coprime_squares::localdensity::alpha_p;
use coprime_squares::restricted::{
    coprime_binary, restricted_decompose, sp_scan, RestrictedWitness, ScanOptions,
};
use coprime_squares::QuadForm;

#[test]
fn scan_rows_are_valid_witnesses() {
    for p in [2u64, 3, 5, 7, 11] {
        let mut rows = Vec::new();
        let report = sp_scan(p, 1, 20_000, 12, &ScanOptions::default(), &mut |r| {
            rows.push(r.clone())
        })
        .unwrap();
        assert_eq!(report.histogram.values().sum::<u64>(), 20_000);
        for row in rows {
            let k = row.min_k.expect("cap 12 covers every p");
            let w = RestrictedWitness::new(row.n, p, row.parts.clone()).unwrap();
            assert_eq!(w.parts(), &row.parts[..], "rows are canonical");
            assert_eq!(w.k() as u32, k);
            assert!(k >= min_squares(row.n));
            if p == 2 {
                assert_eq!(row.n % 8, u64::from(k) % 8);
            }
            if p == 3 {
                assert_eq!(row.n % 3, u64::from(k) % 3);
            }
        }
    }
}

proptest! {
    #[test]
    fn decompose_agrees_with_scan_rows(n in 1u64..5000, pi in 0usize..4, k in 1u32..7) {
        let p = [2u64, 3, 5, 13][pi];
        let mut found = None;
        sp_scan(p, n, n, 12, &ScanOptions::default(), &mut |r| found = Some(r.clone())).unwrap();
        let row = found.unwrap();
        let dfs = restricted_decompose(n, p, k).unwrap();
        if let Some(min_k) = row.min_k {
            if k < min_k {
                prop_assert!(dfs.is_none());
            }
            if k == min_k {
                let w = dfs.unwrap();
                prop_assert_eq!(w.parts(), &row.parts[..]);
            }
        }
    }

    #[test]
    fn coprime_binary_outputs_are_valid(n in 1u64..20_000, k in 1u64..12, pi in 0usize..4) {
        let p = [5u64, 7, 13, 29][pi];
        if let Some((u, v)) = coprime_binary(n, k, p) {
            prop_assert_eq!(u * u + k * v * v, n);
            prop_assert_eq!(gcd(p, u * v), 1);
        } else {
            for u in 1..=((n as f64).sqrt() as u64) {
                for v in 1..=((n as f64).sqrt() as u64) {
                    prop_assert!(u * u + k * v * v != n || (u * v) % p == 0);
                }
            }
        }
    }

    #[test]
    fn density_matches_counting(n in 1u64..400, pi in 0usize..3, fi in 0usize..2) {
        let p = [7u64, 11, 13][pi];
        let diag = [[1u64, 1, 1], [1, 1, 2]][fi];
        let f = QuadForm::diagonal(&diag.map(|d| d as i64)).unwrap();
        let depth = coprime_squares::arith::ord(n, p) + 2;
        prop_assume!(p.pow(depth) <= 3000);
        prop_assert_eq!(alpha_p(n, &f, p).unwrap(), common::diagonal_density(diag, n, p, depth));
    }
}
