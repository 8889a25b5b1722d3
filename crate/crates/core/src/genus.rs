//! Even positive-definite lattices of rank at most 3: enumeration of reduced
//! Gram matrices of a given determinant, isometry testing and genus counts.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::discform::{are_isomorphic, disc_form, negate, FiniteQuadraticForm};
use crate::error::{Error, Result};
use crate::intlat::IntMatrix;
use crate::lattice::GramLattice;

/// Largest determinant accepted by [`enumerate_reduced`].
pub const MAX_GENUS_DET: u64 = 100_000;

type Q = Ratio<i128>;

/// A reduced even positive-definite Gram matrix of rank 1, 2 or 3.
///
/// Diagonal ascending, `2|g_ij| <= g_ii` for `i < j`, all diagonal entries even.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedForm {
    g: Vec<Vec<i64>>,
}

fn det_small(g: &[Vec<i64>]) -> i64 {
    match g.len() {
        0 => 1,
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        _ => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
    }
}

fn check_shape(g: &[Vec<i64>]) -> Result<()> {
    let n = g.len();
    if !(1..=3).contains(&n) || g.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!("expected a square Gram of size 1..3, got {n} rows")));
    }
    for i in 0..n {
        for j in 0..n {
            if g[i][j] != g[j][i] {
                return Err(Error::Domain("Gram matrix is not symmetric".into()));
            }
        }
        if g[i][i] % 2 != 0 {
            return Err(Error::Domain("Gram matrix is not even".into()));
        }
    }
    for k in 1..=n {
        let minor: Vec<Vec<i64>> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
        if det_small(&minor) <= 0 {
            return Err(Error::Domain("Gram matrix is not positive definite".into()));
        }
    }
    Ok(())
}

impl ReducedForm {
    /// Validates a Gram matrix already in reduced shape.
    pub fn new(g: Vec<Vec<i64>>) -> Result<Self> {
        check_shape(&g)?;
        let n = g.len();
        for i in 0..n {
            if i + 1 < n && g[i][i] > g[i + 1][i + 1] {
                return Err(Error::Domain("diagonal is not ascending".into()));
            }
            for j in i + 1..n {
                if 2 * g[i][j].abs() > g[i][i] {
                    return Err(Error::Domain(format!("entry ({i},{j}) is not size-reduced")));
                }
            }
        }
        Ok(ReducedForm { g })
    }

    /// Brings an even positive-definite Gram matrix into reduced shape by
    /// pairwise size reduction and sorting.
    pub fn reduce(g: Vec<Vec<i64>>) -> Result<Self> {
        check_shape(&g)?;
        let n = g.len();
        let mut g = g;
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || 2 * g[i][j].abs() <= g[i][i] {
                        continue;
                    }
                    // e_j -= k e_i
                    let k = round_div(g[i][j], g[i][i]);
                    let (gii, gij, gjj) = (g[i][i], g[i][j], g[j][j]);
                    for l in 0..n {
                        if l != j {
                            g[j][l] -= k * g[i][l];
                            g[l][j] = g[j][l];
                        }
                    }
                    g[j][j] = gjj - 2 * k * gij + k * k * gii;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // sort basis by norm
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| g[i][i]);
        let mut h: Vec<Vec<i64>> = order.iter().map(|&i| order.iter().map(|&j| g[i][j]).collect()).collect();
        // signs: make the first row's off-diagonal entries non-negative
        for j in 1..n {
            if h[0][j] < 0 {
                for l in 0..n {
                    h[j][l] = -h[j][l];
                    h[l][j] = -h[l][j];
                }
            }
        }
        if n == 3 && h[0][1] == 0 && h[0][2] == 0 && h[1][2] < 0 {
            for l in 0..n {
                h[2][l] = -h[2][l];
                h[l][2] = -h[l][2];
            }
        }
        ReducedForm::new(h)
    }

    pub fn rank(&self) -> usize {
        self.g.len()
    }

    pub fn det(&self) -> i64 {
        det_small(&self.g)
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.g
    }

    pub fn gram(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.g)
    }

    pub fn lattice(&self) -> GramLattice {
        GramLattice::new(self.gram()).expect("reduced forms are symmetric")
    }

    fn max_diag(&self) -> i64 {
        self.g[self.rank() - 1][self.rank() - 1]
    }
}

fn round_div(a: i64, b: i64) -> i64 {
    // nearest integer to a/b, b > 0
    (2 * a + b).div_euclid(2 * b)
}

impl fmt::Debug for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.g)
    }
}

impl fmt::Display for ReducedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .g
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for ReducedForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.g.serialize(s)
    }
}

/// Target genus: rank, determinant and discriminant form.
#[derive(Clone, Debug)]
pub struct GenusSpec {
    pub rank: usize,
    pub det: u64,
    pub disc: FiniteQuadraticForm,
}

impl GenusSpec {
    pub fn new(rank: usize, det: u64, disc: FiniteQuadraticForm) -> Result<Self> {
        if !(1..=3).contains(&rank) {
            return Err(Error::Domain(format!("genus rank must be 1..3, got {rank}")));
        }
        if disc.group_order() != det {
            return Err(Error::Domain(format!(
                "discriminant group has order {} but det is {det}",
                disc.group_order()
            )));
        }
        Ok(GenusSpec { rank, det, disc })
    }

    /// Genus of a positive-definite complement of `l`: its form is `-q_l`.
    pub fn complement_of(l: &GramLattice, rank: usize) -> Result<Self> {
        let disc = negate(&disc_form(l)?);
        let det = disc.group_order();
        GenusSpec::new(rank, det, disc)
    }

    /// Genus of a given positive-definite lattice.
    pub fn of_lattice(l: &GramLattice) -> Result<Self> {
        let disc = disc_form(l)?;
        GenusSpec::new(l.rank(), disc.group_order(), disc)
    }
}

fn check_det(rank: usize, det: u64) -> Result<()> {
    if !(1..=3).contains(&rank) {
        return Err(Error::Domain(format!("rank must be 1..3, got {rank}")));
    }
    if det == 0 {
        return Err(Error::Domain("determinant must be positive".into()));
    }
    if det > MAX_GENUS_DET {
        return Err(Error::Resource(format!(
            "determinant {det} exceeds the enumeration bound {MAX_GENUS_DET}"
        )));
    }
    Ok(())
}

fn ternary_with_first(a: i64, det: i64) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut b = a;
    while a * b * b <= 2 * det {
        for r in 0..=a / 2 {
            let m = a * b - r * r;
            for s in 0..=a / 2 {
                for t in -(b / 2)..=b / 2 {
                    let num = det + a * t * t + b * s * s - 2 * r * s * t;
                    if num % m != 0 {
                        continue;
                    }
                    let c = num / m;
                    if c < b || c % 2 != 0 || a * b * c > 2 * det {
                        continue;
                    }
                    let g = vec![vec![a, r, s], vec![r, b, t], vec![s, t, c]];
                    if check_shape(&g).is_ok() {
                        out.push(g);
                    }
                }
            }
        }
        b += 2;
    }
    out
}

/// All reduced even positive-definite Gram matrices of the given rank and
/// determinant, one per isometry class.
pub fn enumerate_reduced(rank: usize, det: u64) -> Result<Vec<ReducedForm>> {
    check_det(rank, det)?;
    let d = det as i64;
    let mut raw: Vec<Vec<Vec<i64>>> = match rank {
        1 => {
            if d % 2 == 0 {
                vec![vec![vec![d]]]
            } else {
                vec![]
            }
        }
        2 => {
            let mut v = Vec::new();
            let mut a = 2;
            while 3 * a * a <= 4 * d {
                for r in 0..=a / 2 {
                    if (d + r * r) % a == 0 {
                        let b = (d + r * r) / a;
                        if b >= a && b % 2 == 0 {
                            v.push(vec![vec![a, r], vec![r, b]]);
                        }
                    }
                }
                a += 2;
            }
            v
        }
        _ => {
            let firsts: Vec<i64> = (1..).map(|k| 2 * k).take_while(|&a| a * a * a <= 2 * d).collect();
            firsts.par_iter().flat_map_iter(|&a| ternary_with_first(a, d)).collect()
        }
    };
    raw.sort();
    let forms: Vec<ReducedForm> = raw.into_iter().map(ReducedForm::new).collect::<Result<_>>()?;
    Ok(dedup_isometric(forms))
}

/// Keeps the first form of each isometry class, preserving order.
fn dedup_isometric(forms: Vec<ReducedForm>) -> Vec<ReducedForm> {
    if forms.len() <= 1 {
        return forms;
    }
    let bound = forms.iter().map(|f| f.g[0][0]).max().unwrap_or(0);
    let keys: Vec<BTreeMap<i64, usize>> = forms.par_iter().map(|f| fingerprint(f, bound)).collect();
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..forms.len() {
        let dup = kept
            .iter()
            .any(|&j| keys[j] == keys[i] && is_isometric(&forms[j], &forms[i]));
        if !dup {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| forms[i].clone()).collect()
}

/// Fincke–Pohst data in exact rationals: `q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
fn quadratic_completion(g: &[Vec<i64>]) -> Vec<Vec<Q>> {
    let n = g.len();
    let mut q: Vec<Vec<Q>> = g
        .iter()
        .map(|r| r.iter().map(|&v| Q::from_integer(v as i128)).collect())
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] = q[i][j] / q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let t = q[k][i] * q[i][l];
                q[k][l] -= t;
            }
        }
    }
    q
}

/// Every nonzero `x` with `x^T G x <= bound`, with its norm. Both `x` and `-x` are listed.
pub fn short_vectors(f: &ReducedForm, bound: i64) -> Vec<(Vec<i64>, i64)> {
    let n = f.rank();
    let q = quadratic_completion(&f.g);
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    enumerate_level(&q, &f.g, n as isize - 1, Q::from_integer(bound as i128), &mut x, &mut out);
    out
}

fn enumerate_level(
    q: &[Vec<Q>],
    g: &[Vec<i64>],
    i: isize,
    budget: Q,
    x: &mut Vec<i64>,
    out: &mut Vec<(Vec<i64>, i64)>,
) {
    if i < 0 {
        if x.iter().any(|&v| v != 0) {
            let n = x.len();
            let mut norm = 0;
            for a in 0..n {
                for b in 0..n {
                    norm += x[a] * g[a][b] * x[b];
                }
            }
            out.push((x.clone(), norm));
        }
        return;
    }
    let i = i as usize;
    let n = x.len();
    let mut center = Q::zero();
    for j in i + 1..n {
        center -= q[i][j] * Q::from_integer(x[j] as i128);
    }
    let cost = |v: i64| {
        let d = Q::from_integer(v as i128) - center;
        q[i][i] * d * d
    };
    // the feasible set is an interval around `center`; its nearest integer is in it if anything is
    let mid = center.round().to_integer() as i64;
    if cost(mid) > budget {
        return;
    }
    let mut lo = mid;
    while cost(lo - 1) <= budget {
        lo -= 1;
    }
    let mut hi = mid;
    while cost(hi + 1) <= budget {
        hi += 1;
    }
    for v in lo..=hi {
        x[i] = v;
        let rest = budget - cost(v);
        enumerate_level(q, g, i as isize - 1, rest, x, out);
    }
    x[i] = 0;
}

/// Number of vectors of each norm up to `bound`.
pub fn fingerprint(f: &ReducedForm, bound: i64) -> BTreeMap<i64, usize> {
    let mut m = BTreeMap::new();
    for (_, norm) in short_vectors(f, bound) {
        *m.entry(norm).or_insert(0) += 1;
    }
    m
}

fn inner(g: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let n = x.len();
    let mut s = 0;
    for a in 0..n {
        if x[a] == 0 {
            continue;
        }
        for b in 0..n {
            s += x[a] * g[a][b] * y[b];
        }
    }
    s
}

/// Whether an integral isometry `l1 -> l2` exists.
pub fn is_isometric(l1: &ReducedForm, l2: &ReducedForm) -> bool {
    if l1.rank() != l2.rank() || l1.det() != l2.det() {
        return false;
    }
    if l1 == l2 {
        return true;
    }
    let bound = l1.max_diag().max(l2.max_diag());
    let v2 = short_vectors(l2, bound);
    let mut c1 = BTreeMap::new();
    for (_, norm) in short_vectors(l1, bound) {
        *c1.entry(norm).or_insert(0usize) += 1;
    }
    let mut c2 = BTreeMap::new();
    for (_, norm) in &v2 {
        *c2.entry(*norm).or_insert(0usize) += 1;
    }
    if c1 != c2 {
        return false;
    }
    let n = l1.rank();
    let cands: Vec<Vec<&Vec<i64>>> = (0..n)
        .map(|i| {
            v2.iter()
                .filter(|(v, norm)| {
                    *norm == l1.g[i][i] && (i > 0 || v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
                })
                .map(|(v, _)| v)
                .collect()
        })
        .collect();
    let mut chosen: Vec<&Vec<i64>> = Vec::with_capacity(n);
    extend_images(&l1.g, &l2.g, &cands, &mut chosen)
}

fn extend_images<'a>(
    a: &[Vec<i64>],
    b: &[Vec<i64>],
    cands: &[Vec<&'a Vec<i64>>],
    chosen: &mut Vec<&'a Vec<i64>>,
) -> bool {
    let i = chosen.len();
    if i == a.len() {
        // equal determinants make the embedding unimodular
        return true;
    }
    for &v in &cands[i] {
        if chosen.iter().enumerate().all(|(j, w)| inner(b, w, v) == a[j][i]) {
            chosen.push(v);
            if extend_images(a, b, cands, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Number of classes in the genus and one reduced representative of each.
pub fn genus_class_count(spec: &GenusSpec) -> Result<(usize, Vec<ReducedForm>)> {
    let candidates = enumerate_reduced(spec.rank, spec.det)?;
    let flags: Vec<Result<bool>> = candidates
        .par_iter()
        .map(|f| are_isomorphic(&disc_form(&f.lattice())?, &spec.disc))
        .collect();
    let mut reps = Vec::new();
    for (f, ok) in candidates.into_iter().zip(flags) {
        if ok? {
            reps.push(f);
        }
    }
    Ok((reps.len(), reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ade_lattice, RootComponent};

    fn rf(rows: &[&[i64]]) -> ReducedForm {
        ReducedForm::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_reduced(1, 2).unwrap(), vec![rf(&[&[2]])]);
        assert!(enumerate_reduced(1, 3).unwrap().is_empty());
        assert_eq!(enumerate_reduced(2, 3).unwrap(), vec![rf(&[&[2, 1], &[1, 2]])]);
        assert_eq!(enumerate_reduced(2, 4).unwrap(), vec![rf(&[&[2, 0], &[0, 2]])]);
    }

    #[test]
    fn det_bound() {
        assert!(matches!(enumerate_reduced(3, 200_000), Err(Error::Resource(_))));
    }

    #[test]
    fn a3_is_the_only_det4_ternary() {
        // even positive-definite rank 3 det 4: A3 only
        let v = enumerate_reduced(3, 4).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].det(), 4);
    }

    #[test]
    fn isometry_examples() {
        let a = rf(&[&[2, 0], &[0, 4]]);
        assert!(is_isometric(&a, &a));
        let conj = ReducedForm::reduce(vec![vec![2, 2], vec![2, 6]]).unwrap();
        assert!(is_isometric(&a, &conj));
        assert!(!is_isometric(&rf(&[&[2, 0], &[0, 2]]), &rf(&[&[2, 1], &[1, 2]])));
    }

    #[test]
    fn reduce_undoes_basis_change() {
        // P^T A P for P = [[1,1,0],[0,1,1],[0,0,1]]
        let a = rf(&[&[4, 1, 1], &[1, 4, 1], &[1, 1, 6]]);
        let p = [[1i64, 1, 0], [0, 1, 1], [0, 0, 1]];
        let mut t = vec![vec![0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[i][j] += p[k][i] * a.g[k][l] * p[l][j];
                    }
                }
            }
        }
        let r = ReducedForm::reduce(t).unwrap();
        assert_eq!(r.det(), a.det());
        assert!(is_isometric(&a, &r));
    }

    #[test]
    fn short_vectors_of_a2() {
        let a2 = rf(&[&[2, 1], &[1, 2]]);
        let v = short_vectors(&a2, 2);
        assert_eq!(v.len(), 6);
        assert_eq!(fingerprint(&a2, 6), BTreeMap::from([(2, 6), (6, 6)]));
    }

    #[test]
    fn genus_examples() {
        let (n, _) = genus_class_count(&GenusSpec::of_lattice(&GramLattice::from_rows(&[[2]]).unwrap()).unwrap()).unwrap();
        assert_eq!(n, 1);
        let a2 = GramLattice::from_rows(&[[2, 1], [1, 2]]).unwrap();
        let (n, reps) = genus_class_count(&GenusSpec::of_lattice(&a2).unwrap()).unwrap();
        assert_eq!(n, 1);
        assert_eq!(reps[0], rf(&[&[2, 1], &[1, 2]]));
    }

    #[test]
    fn rank_one_complements() {
        let spec = GenusSpec::complement_of(&ade_lattice(RootComponent::a(1)), 1).unwrap();
        let (n, reps) = genus_class_count(&spec).unwrap();
        assert_eq!(n, 1);
        assert_eq!(reps[0], rf(&[&[2]]));
        // -q(E7) takes the value 3/2, which (2) does not
        let spec = GenusSpec::complement_of(&ade_lattice(RootComponent::e(7)), 1).unwrap();
        assert_eq!(genus_class_count(&spec).unwrap().0, 0);
    }
}
