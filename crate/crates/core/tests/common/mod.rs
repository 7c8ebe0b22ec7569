//! Oracles shared by the integration tests. None of them call into the
//! library's enumeration or density code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;

/// `#{x mod p^j : sum a_i x_i^2 = n (mod p^j)} / p^(2j)` for a diagonal
/// ternary form, by convolving per-coordinate residue histograms.
pub fn diagonal_density(diag: [u64; 3], n: u64, p: u64, j: u32) -> BigRational {
    let m = p.pow(j) as usize;
    let hist = |a: u64| {
        let mut h = vec![0u64; m];
        for x in 0..m as u64 {
            h[((a % m as u64) * (x * x % m as u64) % m as u64) as usize] += 1;
        }
        h
    };
    let (h1, h2, h3) = (hist(diag[0]), hist(diag[1]), hist(diag[2]));
    let mut h12 = vec![0u64; m];
    for (r1, &c1) in h1.iter().enumerate().filter(|(_, &c)| c > 0) {
        for (r2, &c2) in h2.iter().enumerate().filter(|(_, &c)| c > 0) {
            h12[(r1 + r2) % m] += c1 * c2;
        }
    }
    let target = (n % m as u64) as usize;
    let hits: u64 = (0..m).map(|r3| h12[(target + m - r3) % m] * h3[r3]).sum();
    BigRational::new(BigInt::from(hits), BigInt::from((m * m) as u64))
}

fn gram_value(g: &[[i64; 3]; 3], x: &[i64; 3], y: &[i64; 3]) -> i64 {
    let mut s = 0;
    for i in 0..3 {
        for j in 0..3 {
            s += x[i] * g[i][j] * y[j];
        }
    }
    s
}

/// Number of integer matrices `T` with entries in `[-bound, bound]` and
/// `T^t G T = G`, found column by column over the whole box.
pub fn brute_isometry_count(g: [[i64; 3]; 3], bound: i64) -> u64 {
    let mut boxed = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                boxed.push([a, b, c]);
            }
        }
    }
    let cols: Vec<Vec<[i64; 3]>> = (0..3)
        .map(|i| {
            boxed
                .iter()
                .copied()
                .filter(|v| gram_value(&g, v, v) == g[i][i])
                .collect()
        })
        .collect();
    let mut count = 0;
    for c0 in &cols[0] {
        for c1 in &cols[1] {
            if gram_value(&g, c0, c1) != g[0][1] {
                continue;
            }
            for c2 in &cols[2] {
                if gram_value(&g, c0, c2) == g[0][2] && gram_value(&g, c1, c2) == g[1][2] {
                    count += 1;
                }
            }
        }
    }
    count
}

/// `r(n, f)` for `n <= bound` by a plain box loop over a diagonal form.
pub fn diagonal_theta(diag: [u64; 3], bound: u64) -> Vec<u64> {
    let mut out = vec![0u64; bound as usize + 1];
    let lim = |a: u64| ((bound / a) as f64).sqrt() as i64 + 1;
    for x in -lim(diag[0])..=lim(diag[0]) {
        let vx = diag[0] * (x * x) as u64;
        if vx > bound {
            continue;
        }
        for y in -lim(diag[1])..=lim(diag[1]) {
            let vy = vx + diag[1] * (y * y) as u64;
            if vy > bound {
                continue;
            }
            for z in -lim(diag[2])..=lim(diag[2]) {
                let v = vy + diag[2] * (z * z) as u64;
                if v <= bound {
                    out[v as usize] += 1;
                }
            }
        }
    }
    out
}
