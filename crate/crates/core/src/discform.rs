//! Finite quadratic forms: discriminant forms of even lattices, their
//! p-primary splitting, isomorphism testing, isotropic (glue) subgroups and
//! the forms induced on overlattices.
//!
//! A form is stored on a list of cyclic generators `g_i` of orders `n_i`
//! through a symmetric rational matrix whose diagonal holds `q(g_i) mod 2`
//! and whose off-diagonal holds `b(g_i, g_j) mod 1`. The value on an
//! arbitrary element `x = sum x_i g_i` is then
//! `q(x) = sum x_i^2 q(g_i) + 2 sum_{i<j} x_i x_j b(g_i, g_j) mod 2`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intlat::{kernel_basis, smith_normal_form, solve_rational, IntMatrix};
use crate::lattice::GramLattice;

pub type Rat = Ratio<i128>;

/// Default cap on backtracking nodes in isomorphism and subgroup searches.
pub const DEFAULT_SEARCH_NODES: u64 = 1_000_000;
/// Largest group (or torsion subgroup) whose elements are materialised.
pub const MAX_MATERIALIZED: u64 = 10_000;
/// Largest p-primary part materialised by the isomorphism search.
const MAX_PRIMARY_PART: u64 = 1_000_000;

fn rmod(r: Rat, m: i128) -> Rat {
    let m = Rat::from_integer(m);
    let k = (r / m).floor();
    r - k * m
}

fn rat_str(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A group element as residues modulo the generator orders.
pub type Element = Vec<i64>;

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    gram: Vec<Vec<Rat>>,
}

impl FiniteQuadraticForm {
    /// Validates and reduces the data: diagonal mod 2, off-diagonal mod 1.
    pub fn new(orders: Vec<u64>, gram: Vec<Vec<Rat>>) -> Result<Self> {
        let k = orders.len();
        if gram.len() != k || gram.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("form matrix does not match generator count".into()));
        }
        if orders.iter().any(|&n| n < 2) {
            return Err(Error::Domain("cyclic factor orders must exceed 1".into()));
        }
        let mut g = vec![vec![Rat::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                if gram[i][j] != gram[j][i] && i != j {
                    // b is only defined mod 1
                    if !(gram[i][j] - gram[j][i]).is_integer() {
                        return Err(Error::Domain("bilinear form is not symmetric".into()));
                    }
                }
                g[i][j] = if i == j {
                    rmod(gram[i][i], 2)
                } else {
                    rmod(gram[i][j], 1)
                };
            }
        }
        for i in 0..k {
            let n = orders[i] as i128;
            if !(g[i][i] * Rat::from_integer(n * n) / Rat::from_integer(2)).is_integer()
                || !(g[i][i] * Rat::from_integer(n)).is_integer()
            {
                return Err(Error::Domain(format!(
                    "q(g{i}) = {} is not well defined on Z/{n}",
                    rat_str(&g[i][i])
                )));
            }
            for j in 0..k {
                if i != j && !(g[i][j] * Rat::from_integer(n)).is_integer() {
                    return Err(Error::Domain(format!(
                        "b(g{i}, g{j}) = {} is not well defined on Z/{n}",
                        rat_str(&g[i][j])
                    )));
                }
            }
        }
        Ok(FiniteQuadraticForm { orders, gram: g })
    }

    pub fn trivial() -> Self {
        FiniteQuadraticForm {
            orders: Vec::new(),
            gram: Vec::new(),
        }
    }

    /// Orders of the cyclic generators.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    pub fn group_order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    /// `q(g_i)` in `[0, 2)`.
    pub fn q_generator(&self, i: usize) -> Rat {
        self.gram[i][i]
    }

    /// Canonical invariant factors of the underlying group.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let diag: Vec<BigInt> = self.orders.iter().map(|&n| BigInt::from(n)).collect();
        crate::intlat::invariant_factors(&IntMatrix::from_diagonal(&diag))
            .into_iter()
            .filter_map(|d| d.to_u64())
            .filter(|&d| d > 1)
            .collect()
    }

    pub fn q(&self, x: &[i64]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            let xi = x[i] as i128;
            acc += self.gram[i][i] * Rat::from_integer(xi * xi);
            for j in i + 1..x.len() {
                acc += self.gram[i][j] * Rat::from_integer(2 * xi * x[j] as i128);
            }
        }
        rmod(acc, 2)
    }

    pub fn b(&self, x: &[i64], y: &[i64]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..x.len() {
            if x[i] == 0 {
                continue;
            }
            for j in 0..y.len() {
                if y[j] != 0 {
                    acc += self.gram[i][j] * Rat::from_integer(x[i] as i128 * y[j] as i128);
                }
            }
        }
        rmod(acc, 1)
    }

    /// Reduces every coordinate into `[0, n_i)`.
    pub fn normalize(&self, x: &[i64]) -> Element {
        x.iter()
            .zip(&self.orders)
            .map(|(&v, &n)| v.rem_euclid(n as i64))
            .collect()
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Element {
        let s: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        self.normalize(&s)
    }

    pub fn element_order(&self, x: &[i64]) -> u64 {
        x.iter().zip(&self.orders).fold(1u64, |acc, (&v, &n)| {
            let v = v.rem_euclid(n as i64) as u64;
            acc.lcm(&(n / n.gcd(&v)))
        })
    }

    fn key(&self, x: &[i64]) -> u64 {
        let mut k = 0u64;
        for (&v, &n) in x.iter().zip(&self.orders) {
            k = k * n + v.rem_euclid(n as i64) as u64;
        }
        k
    }

    fn from_key(&self, mut k: u64) -> Element {
        let mut x = vec![0i64; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            x[i] = (k % self.orders[i]) as i64;
            k /= self.orders[i];
        }
        x
    }

    /// All group elements, if the group is at most `limit` large.
    pub fn elements(&self, limit: u64) -> Result<Vec<Element>> {
        let n = self.group_order();
        if n > limit {
            return Err(Error::Resource(format!(
                "group of order {n} exceeds the enumeration bound {limit}"
            )));
        }
        Ok((0..n).map(|k| self.from_key(k)).collect())
    }

    /// Multiset of `(element order, q value)` over the whole group.
    pub fn value_census(&self) -> Result<BTreeMap<(u64, Rat), usize>> {
        let mut out = BTreeMap::new();
        for x in self.elements(MAX_PRIMARY_PART)? {
            *out.entry((self.element_order(&x), self.q(&x))).or_insert(0) += 1;
        }
        Ok(out)
    }
}

impl fmt::Debug for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FQF{{")?;
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "Z/{n}: q={}", rat_str(&self.gram[i][i]))?;
        }
        write!(f, "}}")
    }
}

impl Serialize for FiniteQuadraticForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FiniteQuadraticForm", 3)?;
        st.serialize_field("factors", &self.orders)?;
        let q: Vec<String> = (0..self.orders.len()).map(|i| rat_str(&self.gram[i][i])).collect();
        st.serialize_field("q", &q)?;
        let b: Vec<Vec<String>> = self
            .gram
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| if i == j { rat_str(&rmod(*v, 1)) } else { rat_str(v) })
                    .collect()
            })
            .collect();
        st.serialize_field("b", &b)?;
        st.end()
    }
}

fn big_to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::Resource("discriminant form entry exceeds 128 bits".into()))
}

/// Reduces `num / den` modulo `m` exactly before narrowing to `i128`.
fn reduced_rat(num: &BigInt, den: &BigInt, m: i64) -> Result<Rat> {
    let modulus = den * m;
    let r = num.mod_floor(&modulus);
    Ok(Rat::new(big_to_i128(&r)?, big_to_i128(den)?))
}

/// Discriminant form on `L*/L` of an even nondegenerate lattice.
pub fn disc_form(l: &GramLattice) -> Result<FiniteQuadraticForm> {
    if !l.is_even() {
        return Err(Error::Domain("discriminant form needs an even lattice".into()));
    }
    let g = l.gram();
    let snf = smith_normal_form(g);
    if snf.d.iter().any(Zero::is_zero) {
        return Err(Error::Degenerate("Gram matrix is singular".into()));
    }
    // u G v = D, so the dual vectors v_i / d_i generate L*/L.
    let idx: Vec<usize> = (0..snf.d.len()).filter(|&i| !snf.d[i].is_one()).collect();
    let w = &(&snf.v.transpose() * g) * &snf.v;
    let mut orders = Vec::with_capacity(idx.len());
    let mut gram = vec![vec![Rat::zero(); idx.len()]; idx.len()];
    for (a, &i) in idx.iter().enumerate() {
        orders.push(
            snf.d[i]
                .to_u64()
                .ok_or_else(|| Error::Resource("discriminant group factor exceeds 64 bits".into()))?,
        );
        for (b, &j) in idx.iter().enumerate() {
            let den = &snf.d[i] * &snf.d[j];
            gram[a][b] = reduced_rat(&w[(i, j)], &den, if a == b { 2 } else { 1 })?;
        }
    }
    FiniteQuadraticForm::new(orders, gram)
}

pub fn negate(q: &FiniteQuadraticForm) -> FiniteQuadraticForm {
    let gram = q
        .gram
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| rmod(-*v, if i == j { 2 } else { 1 }))
                .collect()
        })
        .collect();
    FiniteQuadraticForm {
        orders: q.orders.clone(),
        gram,
    }
}

pub fn orthogonal_sum(qs: &[FiniteQuadraticForm]) -> FiniteQuadraticForm {
    let orders: Vec<u64> = qs.iter().flat_map(|q| q.orders.iter().copied()).collect();
    let k = orders.len();
    let mut gram = vec![vec![Rat::zero(); k]; k];
    let mut off = 0;
    for q in qs {
        for i in 0..q.orders.len() {
            for j in 0..q.orders.len() {
                gram[off + i][off + j] = q.gram[i][j];
            }
        }
        off += q.orders.len();
    }
    FiniteQuadraticForm { orders, gram }
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Splits the form into its orthogonal p-primary components.
pub fn p_primary_parts(q: &FiniteQuadraticForm) -> BTreeMap<u64, FiniteQuadraticForm> {
    let mut out = BTreeMap::new();
    for (p, _) in prime_factors(q.group_order()) {
        // generator i contributes (n_i / p^a) g_i of order p^a
        let mut gens: Vec<(usize, u64, u64)> = Vec::new();
        for (i, &n) in q.orders.iter().enumerate() {
            let mut pa = 1;
            while (n / pa) % p == 0 {
                pa *= p;
            }
            if pa > 1 {
                gens.push((i, n / pa, pa));
            }
        }
        let k = gens.len();
        let mut gram = vec![vec![Rat::zero(); k]; k];
        for (a, &(i, ci, _)) in gens.iter().enumerate() {
            for (b, &(j, cj, _)) in gens.iter().enumerate() {
                let scale = Rat::from_integer(ci as i128 * cj as i128);
                gram[a][b] = rmod(q.gram[i][j] * scale, if a == b { 2 } else { 1 });
            }
        }
        let orders = gens.iter().map(|g| g.2).collect();
        out.insert(p, FiniteQuadraticForm { orders, gram });
    }
    out
}

/// Isomorphism test with the default node bound.
pub fn are_isomorphic(q1: &FiniteQuadraticForm, q2: &FiniteQuadraticForm) -> Result<bool> {
    are_isomorphic_bounded(q1, q2, DEFAULT_SEARCH_NODES)
}

/// Decides whether a group isomorphism carries `q1` onto `q2`, one p-part at
/// a time, by backtracking over generator images.
pub fn are_isomorphic_bounded(
    q1: &FiniteQuadraticForm,
    q2: &FiniteQuadraticForm,
    max_nodes: u64,
) -> Result<bool> {
    if q1.invariant_factors() != q2.invariant_factors() {
        return Ok(false);
    }
    let p1 = p_primary_parts(q1);
    let p2 = p_primary_parts(q2);
    for (p, a) in &p1 {
        let Some(b) = p2.get(p) else { return Ok(false) };
        if !primary_isomorphic(a, b, max_nodes)? {
            return Ok(false);
        }
    }
    Ok(true)
}

struct PrimarySearch<'a> {
    src: &'a FiniteQuadraticForm,
    dst: &'a FiniteQuadraticForm,
    order: Vec<usize>,
    candidates: Vec<Vec<Element>>,
    images: Vec<Element>,
    nodes: u64,
    max_nodes: u64,
}

impl PrimarySearch<'_> {
    fn run(&mut self, depth: usize, span: &HashSet<u64>) -> Result<bool> {
        if depth == self.order.len() {
            return Ok(true);
        }
        let gi = self.order[depth];
        let ord = self.src.orders[gi];
        let p = prime_factors(ord)[0].0;
        for c in 0..self.candidates[depth].len() {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(Error::Resource(format!(
                    "isomorphism search exceeded {} nodes",
                    self.max_nodes
                )));
            }
            let x = self.candidates[depth][c].clone();
            let compatible = (0..depth).all(|d| {
                let gj = self.order[d];
                let mut e_i = vec![0; self.src.orders.len()];
                let mut e_j = e_i.clone();
                e_i[gi] = 1;
                e_j[gj] = 1;
                self.dst.b(&x, &self.images[d]) == self.src.b(&e_i, &e_j)
            });
            if !compatible {
                continue;
            }
            // x must have order `ord` modulo the span of earlier images
            let probe: Vec<i64> = x.iter().map(|&v| v * (ord / p) as i64).collect();
            if span.contains(&self.dst.key(&probe)) {
                continue;
            }
            let mut next = HashSet::with_capacity(span.len() * ord as usize);
            for &s in span {
                let base = self.dst.from_key(s);
                let mut cur = base.clone();
                for _ in 0..ord {
                    next.insert(self.dst.key(&cur));
                    cur = self.dst.add(&cur, &x);
                }
            }
            self.images.push(x);
            if self.run(depth + 1, &next)? {
                return Ok(true);
            }
            self.images.pop();
        }
        Ok(false)
    }
}

fn primary_isomorphic(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm, max_nodes: u64) -> Result<bool> {
    if a.group_order() != b.group_order() {
        return Ok(false);
    }
    if a.group_order() > MAX_PRIMARY_PART {
        return Err(Error::Resource(format!(
            "p-primary part of order {} exceeds the search bound",
            a.group_order()
        )));
    }
    let mut sa: Vec<u64> = a.orders.clone();
    let mut sb: Vec<u64> = b.orders.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Ok(false);
    }
    let census_a = a.value_census()?;
    if census_a != b.value_census()? {
        return Ok(false);
    }
    let mut order: Vec<usize> = (0..a.orders.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(a.orders[i]));
    let elems = b.elements(MAX_PRIMARY_PART)?;
    let candidates = order
        .iter()
        .map(|&i| {
            let qa = a.q_generator(i);
            elems
                .iter()
                .filter(|x| b.element_order(x) == a.orders[i] && b.q(x) == qa)
                .cloned()
                .collect()
        })
        .collect();
    let mut search = PrimarySearch {
        src: a,
        dst: b,
        order,
        candidates,
        images: Vec::new(),
        nodes: 0,
        max_nodes,
    };
    let zero: HashSet<u64> = std::iter::once(0).collect();
    search.run(0, &zero)
}

/// A subgroup given by its (sorted) elements and a generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    generators: Vec<Element>,
    elements: Vec<Element>,
}

impl Subgroup {
    pub fn trivial(q: &FiniteQuadraticForm) -> Self {
        Subgroup {
            generators: Vec::new(),
            elements: vec![vec![0; q.num_generators()]],
        }
    }

    /// Subgroup generated by the given elements.
    pub fn generated_by(q: &FiniteQuadraticForm, gens: &[Element]) -> Self {
        let mut keys: HashSet<u64> = std::iter::once(0).collect();
        for g in gens {
            let g = q.normalize(g);
            let mut frontier: Vec<u64> = keys.iter().copied().collect();
            while let Some(k) = frontier.pop() {
                let y = q.add(&q.from_key(k), &g);
                let ky = q.key(&y);
                if keys.insert(ky) {
                    frontier.push(ky);
                }
            }
        }
        let mut sorted: Vec<u64> = keys.into_iter().collect();
        sorted.sort_unstable();
        Subgroup {
            generators: gens.iter().map(|g| q.normalize(g)).collect(),
            elements: sorted.into_iter().map(|k| q.from_key(k)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }
}

/// Every isotropic subgroup of the given order.
pub fn isotropic_subgroups(q: &FiniteQuadraticForm, order: u64) -> Result<Vec<Subgroup>> {
    isotropic_subgroups_bounded(q, order, DEFAULT_SEARCH_NODES)
}

pub fn isotropic_subgroups_bounded(
    q: &FiniteQuadraticForm,
    order: u64,
    max_nodes: u64,
) -> Result<Vec<Subgroup>> {
    if order == 0 || q.group_order() % order != 0 {
        return Err(Error::Domain(format!(
            "{order} does not divide the group order {}",
            q.group_order()
        )));
    }
    if order == 1 {
        return Ok(vec![Subgroup::trivial(q)]);
    }
    // Any subgroup of the given order lives in the `order`-torsion.
    let steps: Vec<u64> = q.orders.iter().map(|&n| n / n.gcd(&order)).collect();
    let sizes: Vec<u64> = q.orders.iter().map(|&n| n.gcd(&order)).collect();
    let torsion: u64 = sizes.iter().product();
    if torsion > MAX_MATERIALIZED {
        return Err(Error::Resource(format!(
            "{order}-torsion of order {torsion} exceeds the enumeration bound {MAX_MATERIALIZED}"
        )));
    }
    let mut isotropic: Vec<Element> = Vec::new();
    for mut k in 1..torsion {
        let mut x = vec![0i64; sizes.len()];
        for i in (0..sizes.len()).rev() {
            x[i] = ((k % sizes[i]) * steps[i]) as i64;
            k /= sizes[i];
        }
        if q.q(&x).is_zero() {
            isotropic.push(x);
        }
    }

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut frontier = vec![Subgroup::trivial(q)];
    let mut found = Vec::new();
    let mut nodes = 0u64;
    while let Some(h) = frontier.pop() {
        let members: HashSet<u64> = h.elements.iter().map(|x| q.key(x)).collect();
        for x in &isotropic {
            if members.contains(&q.key(x)) {
                continue;
            }
            nodes += 1;
            if nodes > max_nodes {
                return Err(Error::Resource(format!(
                    "isotropic subgroup search exceeded {max_nodes} nodes"
                )));
            }
            if !h.generators.iter().all(|g| q.b(g, x).is_zero()) {
                continue;
            }
            let mut gens = h.generators.clone();
            gens.push(x.clone());
            let bigger = Subgroup::generated_by(q, &gens);
            if order % bigger.order() as u64 != 0 {
                continue;
            }
            let sig: Vec<u64> = bigger.elements.iter().map(|e| q.key(e)).collect();
            if !seen.insert(sig) {
                continue;
            }
            if bigger.order() as u64 == order {
                found.push(bigger);
            } else {
                frontier.push(bigger);
            }
        }
    }
    found.sort_by(|a, b| a.elements.cmp(&b.elements));
    Ok(found)
}

/// The form induced on `H^perp / H` for an isotropic subgroup `H`; this is
/// the discriminant form of the corresponding even overlattice.
pub fn overlattice_disc(q: &FiniteQuadraticForm, h: &Subgroup) -> Result<FiniteQuadraticForm> {
    let gens = &h.generators;
    for (i, g) in gens.iter().enumerate() {
        if !q.q(g).is_zero() {
            return Err(Error::Domain("subgroup is not isotropic".into()));
        }
        for g2 in &gens[..i] {
            if !q.b(g, g2).is_zero() {
                return Err(Error::Domain("subgroup is not isotropic".into()));
            }
        }
    }
    if h.order() == 1 {
        return Ok(q.clone());
    }
    let k = q.num_generators();
    let m = gens.len();
    let den: i128 = q
        .gram
        .iter()
        .flatten()
        .fold(1i128, |acc, v| acc.lcm(v.denom()));

    // H^perp lifts to {x in Z^k : D * b(x, h_j) = 0 mod D for all j}.
    let mut at = IntMatrix::zeros(m, k + m);
    for (j, hj) in gens.iter().enumerate() {
        for i in 0..k {
            let mut e = vec![0i64; k];
            e[i] = 1;
            let v = q.b(&e, hj) * Rat::from_integer(den);
            at[(j, i)] = BigInt::from(v.to_integer());
        }
        at[(j, k + j)] = BigInt::from(den);
    }
    let ker = kernel_basis(&at);
    debug_assert_eq!(ker.cols(), k);
    let mut perp = IntMatrix::zeros(k, k);
    for i in 0..k {
        for c in 0..k {
            perp[(i, c)] = ker[(i, c)].clone();
        }
    }

    // Lift of H: its generators together with n_i e_i.
    let mut lifts: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|g| g.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    for (i, &n) in q.orders.iter().enumerate() {
        let mut e = vec![BigInt::zero(); k];
        e[i] = BigInt::from(n);
        lifts.push(e);
    }
    let mut rel = IntMatrix::zeros(k, lifts.len());
    for (c, v) in lifts.iter().enumerate() {
        let coords = solve_rational(&perp, v)?;
        for (i, x) in coords.into_iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::Domain("subgroup is not contained in its orthogonal".into()));
            }
            rel[(i, c)] = x.to_integer();
        }
    }
    let snf = smith_normal_form(&rel);
    let u_inv = crate::intlat::inverse_unimodular(&snf.u)?;
    let basis = &perp * &u_inv;
    let mut orders = Vec::new();
    let mut new_gens: Vec<Element> = Vec::new();
    for (i, d) in snf.d.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        orders.push(d.to_u64().ok_or_else(|| Error::Resource("factor exceeds 64 bits".into()))?);
        let col: Vec<i64> = basis
            .column(i)
            .iter()
            .zip(&q.orders)
            .map(|(x, &n)| x.mod_floor(&BigInt::from(n)).to_i64().unwrap())
            .collect();
        new_gens.push(col);
    }
    let r = new_gens.len();
    let mut gram = vec![vec![Rat::zero(); r]; r];
    for a in 0..r {
        for b in 0..r {
            gram[a][b] = if a == b {
                q.q(&new_gens[a])
            } else {
                q.b(&new_gens[a], &new_gens[b])
            };
        }
    }
    let out = FiniteQuadraticForm::new(orders, gram)?;
    debug_assert_eq!(
        out.group_order() * (h.order() as u64).pow(2),
        q.group_order()
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ade_lattice, direct_sum, AdeConfig, RootComponent};

    fn r(n: i128, d: i128) -> Rat {
        Rat::new(n, d)
    }

    fn q_a1() -> FiniteQuadraticForm {
        disc_form(&ade_lattice(RootComponent::a(1))).unwrap()
    }

    fn q_a2() -> FiniteQuadraticForm {
        disc_form(&ade_lattice(RootComponent::a(2))).unwrap()
    }

    #[test]
    fn root_lattice_forms() {
        let a1 = q_a1();
        assert_eq!(a1.orders(), &[2]);
        assert_eq!(a1.q_generator(0), r(3, 2));
        let a2 = q_a2();
        assert_eq!(a2.orders(), &[3]);
        assert_eq!(a2.q_generator(0), r(4, 3));
        assert!(disc_form(&ade_lattice(RootComponent::e(8))).unwrap().is_trivial());
    }

    #[test]
    fn disc_form_rejects_odd_and_singular() {
        let odd = GramLattice::from_rows(&[[1]]).unwrap();
        assert!(matches!(disc_form(&odd), Err(Error::Domain(_))));
        let singular = GramLattice::from_rows(&[[2, 2], [2, 2]]).unwrap();
        assert!(matches!(disc_form(&singular), Err(Error::Degenerate(_))));
    }

    #[test]
    fn negation() {
        assert!(negate(&FiniteQuadraticForm::trivial()).is_trivial());
        assert_eq!(negate(&q_a1()).q_generator(0), r(1, 2));
        assert_eq!(negate(&negate(&q_a2())), q_a2());
    }

    #[test]
    fn sums() {
        let eight = orthogonal_sum(&vec![q_a1(); 8]);
        assert_eq!(eight.orders(), &[2; 8]);
        assert!(orthogonal_sum(&[]).is_trivial());
        let lhs = disc_form(&direct_sum(&[
            ade_lattice(RootComponent::a(2)),
            ade_lattice(RootComponent::a(1)),
        ]))
        .unwrap();
        let rhs = orthogonal_sum(&[q_a2(), q_a1()]);
        assert!(are_isomorphic(&lhs, &rhs).unwrap());
    }

    #[test]
    fn primary_splitting() {
        // Z/6 with q(g) = 1/6: 3g has q = 9/6 = 3/2 (2-part), 2g has q = 4/6 = 2/3 (3-part)
        let z6 = FiniteQuadraticForm::new(vec![6], vec![vec![r(1, 6)]]).unwrap();
        let parts = p_primary_parts(&z6);
        assert_eq!(parts.keys().copied().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(parts[&2].orders(), &[2]);
        assert_eq!(parts[&2].q_generator(0), r(3, 2));
        assert_eq!(parts[&3].q_generator(0), r(2, 3));
        assert!(are_isomorphic(&z6, &orthogonal_sum(&[parts[&2].clone(), parts[&3].clone()])).unwrap());

        let a1 = p_primary_parts(&q_a1());
        assert_eq!(a1.len(), 1);
        assert_eq!(a1[&2], q_a1());
        assert!(p_primary_parts(&FiniteQuadraticForm::trivial()).is_empty());
    }

    #[test]
    fn isomorphism_examples() {
        assert!(are_isomorphic(&q_a2(), &q_a2()).unwrap());
        let d4 = disc_form(&ade_lattice(RootComponent::d(4))).unwrap();
        assert!(!are_isomorphic(&q_a1(), &d4).unwrap());
        assert!(!are_isomorphic(&q_a2(), &negate(&q_a2())).unwrap());
        // D4 and A1+A1 share a group but not a form: q_D4 takes 1 on all three
        // nonzero elements, q_{2A1} takes 3/2, 3/2, 1.
        let two_a1 = orthogonal_sum(&[q_a1(), q_a1()]);
        assert!(!are_isomorphic(&d4, &two_a1).unwrap());
    }

    #[test]
    fn isomorphism_needs_a_change_of_basis() {
        // the A3 form read on the generator 3g
        let a3 = disc_form(&ade_lattice(RootComponent::a(3))).unwrap();
        let twisted = FiniteQuadraticForm::new(vec![4], vec![vec![a3.q(&[3])]]).unwrap();
        assert!(are_isomorphic(&a3, &twisted).unwrap());

        // E6 alone carries q = 2/3, A2 carries 4/3: not isomorphic. Doubled,
        // both become x^2 + y^2 up to a unit square over F_3.
        let e6 = disc_form(&ade_lattice(RootComponent::e(6))).unwrap();
        assert_eq!(e6.q_generator(0), r(2, 3));
        assert!(!are_isomorphic(&e6, &q_a2()).unwrap());
        let e6e6 = orthogonal_sum(&[e6.clone(), e6]);
        let a2a2 = orthogonal_sum(&[q_a2(), q_a2()]);
        assert!(are_isomorphic(&e6e6, &a2a2).unwrap());
    }

    #[test]
    fn resource_bound_is_enforced() {
        let big = orthogonal_sum(&vec![q_a1(); 8]);
        let res = are_isomorphic_bounded(&big, &big.clone(), 3);
        assert!(matches!(res, Err(Error::Resource(_))));
    }

    /// Brute-force count of isotropic vectors, independent of the search.
    fn isotropic_order_two_oracle(q: &FiniteQuadraticForm) -> usize {
        q.elements(1 << 20)
            .unwrap()
            .into_iter()
            .filter(|x| q.element_order(x) == 2 && q.q(x).is_zero())
            .count()
    }

    #[test]
    fn isotropic_subgroup_examples() {
        let triv = FiniteQuadraticForm::trivial();
        assert_eq!(isotropic_subgroups(&triv, 1).unwrap().len(), 1);

        let eight = orthogonal_sum(&vec![q_a1(); 8]);
        let found = isotropic_subgroups(&eight, 2).unwrap();
        // sums of 4 generators (70) plus the sum of all 8 (q = 12 = 0 mod 2)
        assert_eq!(isotropic_order_two_oracle(&eight), 71);
        assert_eq!(found.len(), 71);

        let k_s4: AdeConfig = "2*A3,3*A2,5*A1".parse().unwrap();
        let qk = disc_form(&k_s4.lattice()).unwrap();
        let glue = isotropic_subgroups(&qk, 2).unwrap();
        assert!(!glue.is_empty());
        assert!(isotropic_subgroups(&qk, 5).is_err());
    }

    #[test]
    fn overlattice_examples() {
        let eight = orthogonal_sum(&vec![q_a1(); 8]);
        let triv = Subgroup::trivial(&eight);
        assert_eq!(overlattice_disc(&eight, &triv).unwrap(), eight);

        let h = Subgroup::generated_by(&eight, &[vec![1, 1, 1, 1, 0, 0, 0, 0]]);
        let over = overlattice_disc(&eight, &h).unwrap();
        assert_eq!(over.group_order(), 64);

        let bad = Subgroup::generated_by(&eight, &[vec![1, 0, 0, 0, 0, 0, 0, 0]]);
        assert!(matches!(overlattice_disc(&eight, &bad), Err(Error::Domain(_))));

        let k_s4: AdeConfig = "2*A3,3*A2,5*A1".parse().unwrap();
        let qk = disc_form(&k_s4.lattice()).unwrap();
        assert_eq!(qk.group_order(), 13824);
        for h in isotropic_subgroups(&qk, 2).unwrap() {
            assert_eq!(overlattice_disc(&qk, &h).unwrap().group_order(), 3456);
        }
    }

    #[test]
    fn overlattice_matches_explicit_lattice() {
        // D4 is the even overlattice of 4A1 glued along (1,1,1,1); E8 glues
        // D8 along a spinor class.
        let four = orthogonal_sum(&vec![q_a1(); 4]);
        let h = Subgroup::generated_by(&four, &[vec![1, 1, 1, 1]]);
        let d4 = disc_form(&ade_lattice(RootComponent::d(4))).unwrap();
        assert!(are_isomorphic(&overlattice_disc(&four, &h).unwrap(), &d4).unwrap());

        let d8 = disc_form(&ade_lattice(RootComponent::d(8))).unwrap();
        let iso = isotropic_subgroups(&d8, 2).unwrap();
        assert!(!iso.is_empty());
        for h in iso {
            assert!(overlattice_disc(&d8, &h).unwrap().is_trivial());
        }
    }

    #[test]
    fn serialization_shape() {
        let v = serde_json::to_value(q_a1()).unwrap();
        assert_eq!(v["factors"], serde_json::json!([2]));
        assert_eq!(v["q"], serde_json::json!(["3/2"]));
    }
}
