//! Even integral lattices given by Gram matrices, and the negative-definite
//! ADE root lattices spanned by configurations of (-2)-curves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intlat::{det_exact, invariant_factors, IntMatrix};

/// Largest total rank accepted for a configuration.
pub const MAX_CONFIG_RANK: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RootKind {
    A,
    D,
    E,
}

/// One connected Dynkin diagram `A_n`, `D_n` or `E_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootComponent {
    kind: RootKind,
    n: usize,
}

impl RootComponent {
    pub fn new(kind: RootKind, n: usize) -> Result<Self> {
        let ok = match kind {
            RootKind::A => n >= 1,
            RootKind::D => n >= 4,
            RootKind::E => (6..=8).contains(&n),
        };
        if !ok {
            return Err(Error::Domain(format!("no root system {kind:?}{n}")));
        }
        Ok(RootComponent { kind, n })
    }

    pub fn a(n: usize) -> Self {
        Self::new(RootKind::A, n).expect("A_n needs n >= 1")
    }

    pub fn d(n: usize) -> Self {
        Self::new(RootKind::D, n).expect("D_n needs n >= 4")
    }

    pub fn e(n: usize) -> Self {
        Self::new(RootKind::E, n).expect("E_n needs n in 6..=8")
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    /// Number of nodes, i.e. the number of curves in the configuration.
    pub fn rank(&self) -> usize {
        self.n
    }
}

// E before D before A, larger rank first: the order configurations are
// conventionally written in.
impl Ord for RootComponent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.kind.cmp(&self.kind).then(other.n.cmp(&self.n))
    }
}

impl PartialOrd for RootComponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RootComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.kind, self.n)
    }
}

impl FromStr for RootComponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('A') | Some('a') => RootKind::A,
            Some('D') | Some('d') => RootKind::D,
            Some('E') | Some('e') => RootKind::E,
            _ => return Err(Error::Parse(format!("bad root component `{s}`"))),
        };
        let n: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Parse(format!("bad root component `{s}`")))?;
        RootComponent::new(kind, n)
    }
}

/// A multiset of root components, e.g. `2*A3,3*A2,5*A1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AdeConfig {
    counts: BTreeMap<RootComponent, usize>,
}

impl AdeConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_components<I>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, RootComponent)>,
    {
        let mut counts = BTreeMap::new();
        for (mult, c) in parts {
            if mult > 0 {
                *counts.entry(c).or_insert(0) += mult;
            }
        }
        let cfg = AdeConfig { counts };
        if cfg.rank() > MAX_CONFIG_RANK {
            return Err(Error::Domain(format!(
                "configuration {cfg} has rank {} > {MAX_CONFIG_RANK}",
                cfg.rank()
            )));
        }
        Ok(cfg)
    }

    /// Total number of curves, `sum c_i`.
    pub fn rank(&self) -> usize {
        self.counts.iter().map(|(c, m)| c.rank() * m).sum()
    }

    /// Number of components, i.e. of singular points.
    pub fn num_components(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(component, multiplicity)` pairs in canonical order.
    pub fn parts(&self) -> impl Iterator<Item = (RootComponent, usize)> + '_ {
        self.counts.iter().map(|(c, m)| (*c, *m))
    }

    /// Every component listed once per occurrence.
    pub fn components(&self) -> Vec<RootComponent> {
        self.parts()
            .flat_map(|(c, m)| std::iter::repeat(c).take(m))
            .collect()
    }

    pub fn multiplicity(&self, c: RootComponent) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    /// The lattice `K` spanned by the configuration.
    pub fn lattice(&self) -> GramLattice {
        let parts: Vec<GramLattice> = self.components().into_iter().map(ade_lattice).collect();
        direct_sum(&parts)
    }
}

impl fmt::Display for AdeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, m)) in self.parts().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if m == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{m}*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for AdeConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Ok(AdeConfig::empty());
        }
        let mut parts = Vec::new();
        for term in compact.split(',') {
            let (mult, comp) = match term.split_once('*') {
                Some((m, c)) => {
                    let m: usize = m
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad multiplicity in `{term}`")))?;
                    (m, c)
                }
                None => (1, term),
            };
            parts.push((mult, comp.parse()?));
        }
        AdeConfig::from_components(parts)
    }
}

impl Serialize for AdeConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AdeConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A lattice given by a symmetric integral Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramLattice {
    gram: IntMatrix,
    even: bool,
}

impl GramLattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::Domain("Gram matrix must be square and symmetric".into()));
        }
        let even = (0..gram.rows()).all(|i| gram[(i, i)].is_even());
        Ok(GramLattice { gram, even })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows))
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn det(&self) -> BigInt {
        det_exact(&self.gram).expect("Gram matrices are square")
    }

    /// Leading principal minors of the Gram are all positive.
    pub fn is_positive_definite(&self) -> bool {
        leading_minors(&self.gram).iter().all(Signed::is_positive)
    }

    /// Leading principal minors of the negated Gram are all positive.
    pub fn is_negative_definite(&self) -> bool {
        leading_minors(&self.gram.scaled(&BigInt::from(-1)))
            .iter()
            .all(Signed::is_positive)
    }
}

fn leading_minors(g: &IntMatrix) -> Vec<BigInt> {
    (1..=g.rows())
        .map(|k| {
            let rows: Vec<Vec<BigInt>> = (0..k).map(|i| g.row(i)[..k].to_vec()).collect();
            let sub = IntMatrix::new(k, k, rows.concat()).unwrap();
            det_exact(&sub).unwrap()
        })
        .collect()
}

/// Negative-definite Cartan Gram matrix of a root component: diagonal -2,
/// +1 on edges. `D_n` forks at the end of its chain; `E_n` is labelled as
/// in Bourbaki (node 2 hangs off node 4).
pub fn ade_lattice(c: RootComponent) -> GramLattice {
    let n = c.rank();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match c.kind() {
        RootKind::A => edges.extend((1..n).map(|i| (i - 1, i))),
        RootKind::D => {
            edges.extend((1..n - 1).map(|i| (i - 1, i)));
            edges.push((n - 3, n - 1));
        }
        RootKind::E => {
            edges.push((0, 2));
            edges.extend((3..n).map(|i| (i - 1, i)));
            edges.push((1, 3));
        }
    }
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = BigInt::from(-2);
    }
    for (i, j) in edges {
        g[(i, j)] = BigInt::one();
        g[(j, i)] = BigInt::one();
    }
    GramLattice { gram: g, even: true }
}

/// Orthogonal direct sum; the empty sum is the rank-0 lattice.
pub fn direct_sum(ls: &[GramLattice]) -> GramLattice {
    let blocks: Vec<&IntMatrix> = ls.iter().map(|l| &l.gram).collect();
    GramLattice {
        gram: IntMatrix::block_diagonal(&blocks),
        even: ls.iter().all(|l| l.even),
    }
}

/// Invariant factors greater than one of the discriminant group `L*/L`.
pub fn disc_group(l: &GramLattice) -> Result<Vec<BigInt>> {
    let d = invariant_factors(&l.gram);
    if d.iter().any(Zero::is_zero) {
        return Err(Error::Degenerate("Gram matrix is singular".into()));
    }
    Ok(d.into_iter().filter(|x| !x.is_one()).collect())
}

/// Multiplies the form by `k`.
pub fn rescale(l: &GramLattice, k: i64) -> Result<GramLattice> {
    if k <= 0 {
        return Err(Error::Domain(format!("rescaling factor {k} must be positive")));
    }
    GramLattice::new(l.gram.scaled(&BigInt::from(k)))
}

/// Sign of the determinant of a nondegenerate lattice of signature `(p, q)`.
pub fn det_sign(_p: usize, q: usize) -> i32 {
    if q % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Order of the local fundamental group of the du Val singularity of the
/// given type: cyclic, binary dihedral, binary tetrahedral/octahedral/
/// icosahedral.
pub fn stabilizer_order(c: RootComponent) -> u64 {
    let n = c.rank() as u64;
    match c.kind() {
        RootKind::A => n + 1,
        RootKind::D => 4 * (n - 2),
        RootKind::E => match n {
            6 => 24,
            7 => 48,
            _ => 120,
        },
    }
}

/// `|det|` of a root component, as a closed form used to cross-check the
/// Gram construction: `n+1`, `4`, `9-n`.
pub fn root_discriminant(c: RootComponent) -> BigInt {
    let n = c.rank() as i64;
    let m = match c.kind() {
        RootKind::A => n + 1,
        RootKind::D => 4,
        RootKind::E => 9 - n,
    };
    BigInt::from(m * det_sign(0, c.rank()) as i64)
}
