//! Finite groups as Cayley tables, element-order census, and a brute-force
//! integral cohomology oracle for `H^3(G, Z)` on small groups.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{invariant_factors, IntMatrix};

/// Largest group built by closing permutation generators.
pub const MAX_GROUP_ORDER: usize = 10_000;
/// Default largest group handed to the bar-resolution oracle.
pub const DEFAULT_H3_CAP: usize = 12;
/// Symplectic automorphisms have order at most 8.
pub const MAX_SYMPLECTIC_ORDER: u32 = 8;

/// A finite group on `0..n` with `0` the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<u32>,
}

impl FiniteGroup {
    /// Validates identity, inverses and associativity.
    pub fn from_cayley(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Domain("a group has at least one element".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("Cayley table must be square".into()));
        }
        if rows.iter().flatten().any(|&x| x >= n) {
            return Err(Error::Domain("Cayley table entry out of range".into()));
        }
        let table: Vec<u32> = rows.iter().flatten().map(|&x| x as u32).collect();
        let g = FiniteGroup { n, table };
        for a in 0..n {
            if g.mul(0, a) != a || g.mul(a, 0) != a {
                return Err(Error::Domain("element 0 is not the identity".into()));
            }
            if !(0..n).any(|b| g.mul(a, b) == 0) {
                return Err(Error::Domain(format!("element {a} has no inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = g.mul(a, b);
                for c in 0..n {
                    if g.mul(ab, c) != g.mul(a, g.mul(b, c)) {
                        return Err(Error::Domain(format!(
                            "Cayley table is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(g)
    }

    /// Closes permutations of `0..degree` under composition.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self> {
        let degree = gens.iter().map(Vec::len).max().unwrap_or(0);
        let pad = |p: &Vec<usize>| -> Result<Vec<u16>> {
            let mut seen = vec![false; degree];
            let mut out: Vec<u16> = Vec::with_capacity(degree);
            for i in 0..degree {
                let x = p.get(i).copied().unwrap_or(i);
                if x >= degree || seen[x] {
                    return Err(Error::Domain("generator is not a permutation".into()));
                }
                seen[x] = true;
                out.push(x as u16);
            }
            Ok(out)
        };
        let gens: Vec<Vec<u16>> = gens.iter().map(pad).collect::<Result<_>>()?;
        let identity: Vec<u16> = (0..degree as u16).collect();
        // (p * q)(i) = q(p(i)): apply p first
        let compose = |p: &[u16], q: &[u16]| -> Vec<u16> { p.iter().map(|&i| q[i as usize]).collect() };

        let mut elems = vec![identity.clone()];
        let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
        index.insert(identity, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(e) = queue.pop_front() {
            for s in &gens {
                let prod = compose(&elems[e], s);
                if !index.contains_key(&prod) {
                    if elems.len() == MAX_GROUP_ORDER {
                        return Err(Error::Resource(format!(
                            "permutation group exceeds {MAX_GROUP_ORDER} elements"
                        )));
                    }
                    index.insert(prod.clone(), elems.len() as u32);
                    queue.push_back(elems.len());
                    elems.push(prod);
                }
            }
        }
        let n = elems.len();
        let mut table = Vec::with_capacity(n * n);
        for a in &elems {
            for b in &elems {
                table.push(index[&compose(a, b)]);
            }
        }
        Ok(FiniteGroup { n, table })
    }

    /// Permutation generators in cycle notation over points `1..`, e.g.
    /// `"(1,2,3)(4,5)"` or `"(1 2 3)"`.
    pub fn from_cycle_notation<S: AsRef<str>>(gens: &[S]) -> Result<Self> {
        let perms: Vec<Vec<usize>> = gens.iter().map(|s| parse_cycles(s.as_ref())).collect::<Result<_>>()?;
        let degree = perms.iter().map(Vec::len).max().unwrap_or(0);
        let perms: Vec<Vec<usize>> = perms
            .into_iter()
            .map(|mut p| {
                let l = p.len();
                p.extend(l..degree);
                p
            })
            .collect();
        Self::from_permutations(&perms)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).flat_map(|a| (0..n).map(move |b| ((a + b) % n) as u32)).collect();
        FiniteGroup { n, table }
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let n = a.n * b.n;
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let (x1, x2) = (x / b.n, x % b.n);
                let (y1, y2) = (y / b.n, y % b.n);
                table.push((a.mul(x1, y1) * b.n + b.mul(x2, y2)) as u32);
            }
        }
        FiniteGroup { n, table }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    pub fn element_order(&self, a: usize) -> u32 {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Cayley table rows, for serialisation.
    pub fn cayley_rows(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.mul(a, b)).collect())
            .collect()
    }
}

fn parse_cycles(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad cycle notation `{s}`"));
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body_end = rest.find(')').ok_or_else(bad)?;
        if !rest.starts_with('(') {
            return Err(bad());
        }
        let body = &rest[1..body_end];
        let pts: Vec<usize> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if pts.iter().any(|&p| p == 0) {
            return Err(Error::Parse(format!("cycle points start at 1 in `{s}`")));
        }
        cycles.push(pts);
        rest = rest[body_end + 1..].trim_start();
    }
    let degree = cycles.iter().flatten().copied().max().unwrap_or(0);
    let mut perm: Vec<usize> = (0..degree).collect();
    let mut moved = vec![false; degree];
    for c in &cycles {
        for (i, &p) in c.iter().enumerate() {
            if moved[p - 1] {
                return Err(Error::Parse(format!("point {p} repeated in `{s}`")));
            }
            moved[p - 1] = true;
            perm[p - 1] = c[(i + 1) % c.len()] - 1;
        }
    }
    Ok(perm)
}

/// Group input file: either a Cayley table or permutation generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cayley: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm_generators: Option<Vec<Generator>>,
}

/// One generator: a cycle string, or a list of cycle strings to multiply.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generator {
    Cycles(String),
    Parts(Vec<String>),
}

impl Generator {
    fn notation(&self) -> String {
        match self {
            Generator::Cycles(s) => s.clone(),
            Generator::Parts(v) => v.concat(),
        }
    }
}

impl GroupFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<FiniteGroup> {
        match (&self.cayley, &self.perm_generators) {
            (Some(t), None) => FiniteGroup::from_cayley(t.clone()),
            (None, Some(g)) => {
                let gens: Vec<String> = g.iter().map(Generator::notation).collect();
                FiniteGroup::from_cycle_notation(&gens)
            }
            _ => Err(Error::Parse(
                "group file needs exactly one of `cayley` or `perm_generators`".into(),
            )),
        }
    }
}

/// Number of elements of each order `n >= 2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderCensus {
    m: BTreeMap<u32, u64>,
}

impl OrderCensus {
    pub fn new(m: BTreeMap<u32, u64>) -> Result<Self> {
        if m.keys().any(|&n| n < 2) {
            return Err(Error::Domain("census is indexed by element orders >= 2".into()));
        }
        Ok(OrderCensus { m })
    }

    pub fn count(&self, n: u32) -> u64 {
        self.m.get(&n).copied().unwrap_or(0)
    }

    /// Number of non-identity elements.
    pub fn total(&self) -> u64 {
        self.m.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.m.iter().map(|(&n, &c)| (n, c))
    }

    pub fn max_order(&self) -> Option<u32> {
        self.m.iter().filter(|(_, &c)| c > 0).map(|(&n, _)| n).max()
    }
}

impl FromIterator<(u32, u64)> for OrderCensus {
    fn from_iter<I: IntoIterator<Item = (u32, u64)>>(iter: I) -> Self {
        OrderCensus { m: iter.into_iter().collect() }
    }
}

pub fn order_census(g: &FiniteGroup) -> Result<OrderCensus> {
    let mut m = BTreeMap::new();
    for a in 1..g.order() {
        let k = g.element_order(a);
        if k > MAX_SYMPLECTIC_ORDER {
            return Err(Error::NotAdmissible(format!(
                "element {a} has order {k} > {MAX_SYMPLECTIC_ORDER}"
            )));
        }
        *m.entry(k).or_insert(0) += 1;
    }
    Ok(OrderCensus { m })
}

/// Outcome of the bar-resolution computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H3Computation {
    /// Invariant factors of `H^3(G, Z)`; empty when the group vanishes.
    pub factors: Vec<BigInt>,
    /// Dimensions of the normalized cochain groups `C^2, C^3, C^4`.
    pub cochain_dims: [usize; 3],
    pub rank_d2: usize,
    pub rank_d3: usize,
}

impl H3Computation {
    pub fn order(&self) -> BigInt {
        self.factors.iter().product()
    }
}

pub fn h3_bar_resolution(g: &FiniteGroup) -> Result<H3Computation> {
    h3_bar_resolution_capped(g, DEFAULT_H3_CAP)
}

/// `H^3(G, Z) = ker d^3 / im d^2` on normalized inhomogeneous cochains with
/// trivial coefficients.
///
/// `ker d^3` is saturated in `C^3`, so once `rank ker d^3 = rank im d^2` the
/// quotient is exactly the torsion of `coker d^2`, read off its Smith form.
/// The rank of `d^3` is certified by elimination modulo a prime: a rank mod
/// p never exceeds the rational rank, and `d^3 d^2 = 0` bounds it above.
pub fn h3_bar_resolution_capped(g: &FiniteGroup, cap: usize) -> Result<H3Computation> {
    let n = g.order();
    if n > cap {
        return Err(Error::Resource(format!(
            "group of order {n} exceeds the bar-resolution cap {cap}; supply h3_order as record data instead"
        )));
    }
    let m = n - 1;
    let bar = Bar { g, m };
    let (c2, c3, c4) = (m * m, m * m * m, m * m * m * m);

    let mut d2 = IntMatrix::zeros(c3, c2);
    for (row, t) in bar.tuples(3).enumerate() {
        for (col, sign) in bar.d2_terms(&t) {
            d2[(row, col)] += BigInt::from(sign);
        }
    }

    // d3 . d2 = 0, column by column
    for col in 0..c2 {
        let h: Vec<i64> = (0..c3).map(|r| i64::try_from(&d2[(r, col)]).unwrap()).collect();
        for q in bar.tuples(4) {
            let v: i64 = bar.d3_terms(&q).map(|(idx, s)| s * h[idx]).sum();
            if v != 0 {
                return Err(Error::inconsistent(
                    "bar complex",
                    format!("d3 . d2 is nonzero at {q:?}"),
                ));
            }
        }
    }

    let d = invariant_factors(&d2);
    let rank_d2 = d.iter().filter(|x| !x.is_zero()).count();
    let target = c3 - rank_d2;
    let rank_d3 = rank_mod_p(bar.tuples(4).map(|q| bar.d3_terms(&q).collect::<Vec<_>>()), c3, target);
    if rank_d3 != target {
        return Err(Error::inconsistent(
            "bar complex",
            format!("rank d3 = {rank_d3} mod p, expected {target}; H^3 would be infinite"),
        ));
    }
    let factors = d.into_iter().filter(|x| !x.is_zero() && !x.is_one()).collect();
    Ok(H3Computation {
        factors,
        cochain_dims: [c2, c3, c4],
        rank_d2,
        rank_d3,
    })
}

/// Indexing of normalized cochains: tuples of non-identity elements.
struct Bar<'a> {
    g: &'a FiniteGroup,
    m: usize,
}

impl Bar<'_> {
    fn tuples(&self, k: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
        let total = self.m.pow(k as u32);
        (0..total).map(move |mut idx| {
            let mut t = vec![0; k];
            for i in (0..k).rev() {
                t[i] = idx % self.m + 1;
                idx /= self.m;
            }
            t
        })
    }

    /// Column index of a tuple, or `None` if it touches the identity.
    fn index(&self, t: &[usize]) -> Option<usize> {
        t.iter()
            .try_fold(0usize, |acc, &x| (x != 0).then(|| acc * self.m + x - 1))
    }

    /// Coefficients of `(d f)(t)` for `t = (a, b, c)` in terms of `f` on pairs.
    fn d2_terms(&self, t: &[usize]) -> impl Iterator<Item = (usize, i64)> {
        let g = self.g;
        let (a, b, c) = (t[0], t[1], t[2]);
        [
            (vec![b, c], 1),
            (vec![g.mul(a, b), c], -1),
            (vec![a, g.mul(b, c)], 1),
            (vec![a, b], -1),
        ]
        .into_iter()
        .filter_map(|(s, sign)| self.index(&s).map(|i| (i, sign)))
        .collect::<Vec<_>>()
        .into_iter()
    }

    /// Coefficients of `(d f)(t)` for `t = (a, b, c, e)` in terms of `f` on triples.
    fn d3_terms(&self, t: &[usize]) -> impl Iterator<Item = (usize, i64)> {
        let g = self.g;
        let (a, b, c, e) = (t[0], t[1], t[2], t[3]);
        [
            (vec![b, c, e], 1),
            (vec![g.mul(a, b), c, e], -1),
            (vec![a, g.mul(b, c), e], 1),
            (vec![a, b, g.mul(c, e)], -1),
            (vec![a, b, c], 1),
        ]
        .into_iter()
        .filter_map(|(s, sign)| self.index(&s).map(|i| (i, sign)))
        .collect::<Vec<_>>()
        .into_iter()
    }
}

const RANK_PRIME: u64 = 2_147_483_647;

/// Rank of a sparse integer matrix modulo `RANK_PRIME`, stopping early once
/// `stop_at` is reached.
fn rank_mod_p<I>(rows: I, cols: usize, stop_at: usize) -> usize
where
    I: Iterator<Item = Vec<(usize, i64)>>,
{
    let p = RANK_PRIME;
    let inv = |a: u64| -> u64 {
        // Fermat
        let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    };
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; cols];
    let mut rank = 0;
    if stop_at == 0 {
        return 0;
    }
    for sparse in rows {
        let mut row = vec![0u64; cols];
        for (c, v) in sparse {
            row[c] = (row[c] + v.rem_euclid(p as i64) as u64) % p;
        }
        let mut lead = None;
        for c in 0..cols {
            if row[c] == 0 {
                continue;
            }
            match &pivots[c] {
                Some(piv) => {
                    let f = row[c];
                    for j in c..cols {
                        if piv[j] != 0 {
                            row[j] = (row[j] + p - f * piv[j] % p) % p;
                        }
                    }
                }
                None => {
                    lead = Some(c);
                    break;
                }
            }
        }
        if let Some(c) = lead {
            let s = inv(row[c]);
            for x in row.iter_mut().skip(c) {
                *x = *x * s % p;
            }
            pivots[c] = Some(row);
            rank += 1;
            if rank == stop_at {
                break;
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        FiniteGroup::from_cycle_notation(&["(1,2,3)", "(1,2)"]).unwrap()
    }

    fn s4() -> FiniteGroup {
        FiniteGroup::from_cycle_notation(&["(1,2,3,4)", "(1,2)"]).unwrap()
    }

    #[test]
    fn cycle_parsing() {
        assert_eq!(parse_cycles("(1,2,3)(4,5)").unwrap(), vec![1, 2, 0, 4, 3]);
        assert_eq!(parse_cycles("(1 3)").unwrap(), vec![2, 1, 0]);
        assert_eq!(parse_cycles("()").unwrap(), Vec::<usize>::new());
        assert!(parse_cycles("(1,1)").is_err());
        assert!(parse_cycles("1,2").is_err());
        assert!(parse_cycles("(0,1)").is_err());
    }

    #[test]
    fn permutation_closure() {
        assert_eq!(s3().order(), 6);
        assert_eq!(s4().order(), 24);
        let a5 = FiniteGroup::from_cycle_notation(&["(1,2,3,4,5)", "(1,2,3)"]).unwrap();
        assert_eq!(a5.order(), 60);
    }

    #[test]
    fn cayley_validation() {
        let c2 = FiniteGroup::from_cayley(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(c2, FiniteGroup::cyclic(2));
        assert!(FiniteGroup::from_cayley(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::from_cayley(vec![vec![1, 0], vec![0, 1]]).is_err());
        // a Latin square with identity that is not associative
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::from_cayley(loop5).is_err());
        // round trip through the table
        let s3 = s3();
        assert_eq!(FiniteGroup::from_cayley(s3.cayley_rows()).unwrap(), s3);
    }

    #[test]
    fn census_examples() {
        let c2: OrderCensus = [(2, 1)].into_iter().collect();
        assert_eq!(order_census(&FiniteGroup::cyclic(2)).unwrap(), c2);
        let s4c: OrderCensus = [(2, 9), (3, 8), (4, 6)].into_iter().collect();
        assert_eq!(order_census(&s4()).unwrap(), s4c);
        assert!(matches!(
            order_census(&FiniteGroup::cyclic(9)),
            Err(Error::NotAdmissible(_))
        ));
        assert!(order_census(&FiniteGroup::cyclic(1)).unwrap().total() == 0);
    }

    fn h3(g: &FiniteGroup) -> Vec<i64> {
        h3_bar_resolution(g)
            .unwrap()
            .factors
            .iter()
            .map(|x| i64::try_from(x).unwrap())
            .collect()
    }

    #[test]
    fn h3_small_groups() {
        assert!(h3(&FiniteGroup::cyclic(1)).is_empty());
        assert!(h3(&FiniteGroup::cyclic(2)).is_empty());
        let v4 = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        assert_eq!(h3(&v4), vec![2]);
        assert!(h3(&s3()).is_empty());
    }

    #[test]
    fn h3_cap() {
        assert!(matches!(h3_bar_resolution(&s4()), Err(Error::Resource(_))));
    }

    #[test]
    fn modular_rank() {
        // [[1,2],[2,4],[0,1]] has rank 2
        let rows = vec![vec![(0, 1), (1, 2)], vec![(0, 2), (1, 4)], vec![(1, 1)]];
        assert_eq!(rank_mod_p(rows.clone().into_iter(), 2, 2), 2);
        assert_eq!(rank_mod_p(rows.into_iter().take(2), 2, 2), 1);
    }

    #[test]
    fn group_file_forms() {
        let f = GroupFile::from_json(r#"{"perm_generators": [["(1,2)", "(3,4)"], "(1,3)(2,4)"]}"#).unwrap();
        assert_eq!(f.build().unwrap().order(), 4);
        let f = GroupFile::from_json(r#"{"cayley": [[0,1],[1,0]]}"#).unwrap();
        assert_eq!(f.build().unwrap().order(), 2);
        assert!(GroupFile::from_json(r#"{"cayley": [[0]], "extra": 1}"#).is_err());
        let both = GroupFile::from_json(r#"{"cayley": [[0]], "perm_generators": ["(1,2)"]}"#).unwrap();
        assert!(both.build().is_err());
    }
}
