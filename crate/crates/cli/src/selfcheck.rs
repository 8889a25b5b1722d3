//! Seeded randomized cross-checks run by `verify`.

use k3lattice::discform::{are_isomorphic, disc_form};
use k3lattice::intlat::{det_exact, smith_normal_form, IntMatrix};
use k3lattice::{AdeConfig, GramLattice};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

/// A random unimodular matrix built from elementary row operations.
pub fn random_unimodular(rng: &mut impl Rng, n: usize, steps: usize) -> IntMatrix {
    let mut p = IntMatrix::identity(n);
    if n < 2 {
        return p;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let k = BigInt::from(rng.gen_range(-2i64..=2));
        for c in 0..n {
            let v = &p[(j, c)] * &k;
            p[(i, c)] += v;
        }
    }
    p
}

/// `u A v = D` with `|det A| = prod d_i` on random square matrices.
pub fn snf_check(seed: u64, cases: usize) -> SelfCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=5);
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-20..=20)).collect()).collect();
        let a = IntMatrix::from_rows(&rows);
        let s = smith_normal_form(&a);
        let ok_recon = &(&s.u * &a) * &s.v == s.diagonal();
        let prod: BigInt = s.d.iter().product();
        let ok_det = det_exact(&a).map(|d| d.abs() == prod.abs()).unwrap_or(false);
        let ok_div = s.d.windows(2).all(|w| w[1].is_zero() || (&w[1] % &w[0]).is_zero());
        if !(ok_recon && ok_det && ok_div) {
            failures += 1;
        }
    }
    SelfCheck { name: "SNF reconstruction and determinant", cases, failures }
}

/// Discriminant forms of random configurations are unchanged by random base changes.
pub fn disc_form_check(seed: u64, cases: usize) -> SelfCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let pool = ["A1", "A2", "A3", "A4", "A5", "D4", "D5", "E6", "E7"];
    let mut failures = 0;
    for _ in 0..cases {
        let k = rng.gen_range(1..=3);
        let parts: Vec<&str> = (0..k).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let cfg: AdeConfig = parts.join(",").parse().expect("pool entries parse");
        let l = cfg.lattice();
        let p = random_unimodular(&mut rng, l.rank(), 3 * l.rank());
        let g2 = &(&p * l.gram()) * &p.transpose();
        let ok = GramLattice::new(g2)
            .and_then(|l2| are_isomorphic(&disc_form(&l)?, &disc_form(&l2)?))
            .unwrap_or(false);
        if !ok {
            failures += 1;
        }
    }
    SelfCheck { name: "discriminant form under change of basis", cases, failures }
}
