//! Action records, the two rank computations, Xiao's counting formula and the
//! discriminant chain `d(K) -> d(M) -> d(J) -> d(H²(X,Z)^G) -> d(S_G)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::discform::{disc_form, isotropic_subgroups};
use crate::error::{Error, Result};
use crate::factor::factored;
use crate::groups::{OrderCensus, MAX_SYMPLECTIC_ORDER};
use crate::lattice::{det_sign, stabilizer_order, AdeConfig, RootComponent};

/// Largest rank of `S_G` allowed in a record.
pub const MAX_RECORD_RANK: usize = 19;

/// Text of the assumption used for the last index step of the chain.
pub const COKERNEL_ASSUMPTION: &str = "[H^2(X,Z)^G : J] = |H^3(G,Z)|";

const SHIPPED_RECORDS: &str = include_str!("../data/records.json");
const SHIPPED_REFERENCES: &str = include_str!("../data/reference_values.json");

/// One symplectic action: the group data and the singularity configuration of `X/G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub name: String,
    pub group_order: u64,
    #[serde(default)]
    pub census: Option<OrderCensus>,
    pub config: AdeConfig,
    /// `[M : K]`; `None` when unknown.
    #[serde(default)]
    pub glue_index: Option<u64>,
    /// `|H³(G, Z)|`; `None` when unknown.
    #[serde(default)]
    pub h3_order: Option<u64>,
    #[serde(default)]
    pub provenance: String,
}

impl ActionRecord {
    /// Checks the record invariants that do not depend on the chain.
    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| Error::Domain(format!("record `{}`: {msg}", self.name));
        if self.group_order == 0 {
            return Err(ctx("group_order must be positive".into()));
        }
        if self.config.rank() > MAX_RECORD_RANK {
            return Err(ctx(format!(
                "config rank {} exceeds {MAX_RECORD_RANK}",
                self.config.rank()
            )));
        }
        if let Some(c) = &self.census {
            if c.total() != self.group_order - 1 {
                return Err(ctx(format!(
                    "census counts {} non-identity elements, expected {}",
                    c.total(),
                    self.group_order - 1
                )));
            }
        }
        if self.glue_index == Some(0) || self.h3_order == Some(0) {
            return Err(ctx("glue_index and h3_order must be positive".into()));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.config.rank()
    }
}

/// Parses a JSON array of records and validates each one.
pub fn parse_records(text: &str) -> Result<Vec<ActionRecord>> {
    let recs: Vec<ActionRecord> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for r in &recs {
        r.validate()?;
    }
    Ok(recs)
}

/// The record set bundled with the crate.
pub fn shipped_records() -> Vec<ActionRecord> {
    parse_records(SHIPPED_RECORDS).expect("bundled records are valid")
}

pub fn shipped_records_json() -> &'static str {
    SHIPPED_RECORDS
}

/// Number of fixed points of an element of each order `n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FixedPointProfile {
    f: BTreeMap<u32, u64>,
}

impl FixedPointProfile {
    pub fn new(f: BTreeMap<u32, u64>) -> Self {
        FixedPointProfile { f }
    }

    /// The profile for orders 2 to 8.
    pub fn standard() -> Self {
        [(2, 8), (3, 6), (4, 4), (5, 4), (6, 2), (7, 3), (8, 2)]
            .into_iter()
            .collect()
    }

    pub fn get(&self, n: u32) -> Option<u64> {
        self.f.get(&n).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.f.iter().map(|(&n, &v)| (n, v))
    }
}

impl FromIterator<(u32, u64)> for FixedPointProfile {
    fn from_iter<I: IntoIterator<Item = (u32, u64)>>(iter: I) -> Self {
        FixedPointProfile { f: iter.into_iter().collect() }
    }
}

/// `rank S_G = sum c_i`, the number of exceptional curves.
pub fn rank_from_config(config: &AdeConfig) -> usize {
    config.rank()
}

/// `24 - rank H*(X,Z)^G`, with the invariant rank computed from fixed-point counts.
pub fn rank_from_group(census: &OrderCensus, group_order: u64, f: &FixedPointProfile) -> Result<usize> {
    if group_order == 0 {
        return Err(Error::Domain("group order must be positive".into()));
    }
    let mut total: u64 = 24;
    for (n, m) in census.iter() {
        if n > MAX_SYMPLECTIC_ORDER {
            return Err(Error::NotAdmissible(format!("census contains elements of order {n}")));
        }
        let fix = f
            .get(n)
            .ok_or_else(|| Error::Domain(format!("fixed-point profile has no value for order {n}")))?;
        total += m * fix;
    }
    if total % group_order != 0 {
        return Err(Error::inconsistent(
            "rank H*(X,Z)^G",
            format!("(24 + sum m(n) f(n)) = {total} is not divisible by |G| = {group_order}"),
        ));
    }
    let invariant = total / group_order;
    if invariant < 4 {
        return Err(Error::inconsistent(
            "rank H*(X,Z)^G",
            format!("invariant rank {invariant} is below 4"),
        ));
    }
    if invariant > 24 {
        return Err(Error::inconsistent(
            "rank H*(X,Z)^G",
            format!("invariant rank {invariant} exceeds 24"),
        ));
    }
    Ok((24 - invariant) as usize)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `(N - 1)/N` for one singular point.
fn point_defect(c: RootComponent) -> BigRational {
    let n = stabilizer_order(c) as i64;
    rat(n - 1, n)
}

/// Right-hand side of Xiao's formula: `24(|G|-1)/|G| - sum (N_i - 1)/N_i`.
pub fn xiao_rhs(config: &AdeConfig, group_order: u64) -> BigRational {
    let g = group_order as i64;
    let mut rhs = rat(24 * (g - 1), g);
    for (c, m) in config.parts() {
        rhs -= point_defect(c) * BigInt::from(m);
    }
    rhs
}

pub fn xiao_consistency(config: &AdeConfig, group_order: u64) -> bool {
    if group_order == 0 {
        return false;
    }
    BigRational::from_integer(BigInt::from(config.rank())) == xiao_rhs(config, group_order)
}

/// Euler-characteristic count for a torus quotient: `sum c_i = 24 - sum (N_i - 1)/N_i`.
pub fn torus_euler_consistency(config: &AdeConfig) -> bool {
    let mut rhs = rat(24, 1);
    for (c, m) in config.parts() {
        rhs -= point_defect(c) * BigInt::from(m);
    }
    BigRational::from_integer(BigInt::from(config.rank())) == rhs
}

/// True when the census describes a cyclic group of the record's order.
fn is_cyclic_record(r: &ActionRecord) -> bool {
    let n = r.group_order;
    n >= 2
        && n <= MAX_SYMPLECTIC_ORDER as u64
        && r.census.as_ref().is_some_and(|c| c.count(n as u32) > 0)
}

/// Solves Xiao's formula on a `C_n` record for the number of `A_{n-1}` points.
fn solve_full_stabilizer_points(r: &ActionRecord) -> Result<BigRational> {
    let n = r.group_order as i64;
    let full = RootComponent::a(n as usize - 1);
    let mut rest_rank = BigRational::zero();
    let mut rest_defect = BigRational::zero();
    for (c, m) in r.config.parts() {
        if c != full {
            rest_rank += rat((c.rank() * m) as i64, 1);
            rest_defect += point_defect(c) * BigInt::from(m);
        }
    }
    // k (n-1) + rest_rank = 24 (n-1)/n - k (n-1)/n - rest_defect
    let coeff = rat((n - 1) * (n + 1), n);
    Ok((rat(24 * (n - 1), n) - rest_defect - rest_rank) / coeff)
}

/// Derives `f(n)` from the cyclic records and cross-checks both rank formulas.
pub fn derive_fixed_point_profile(records: &[ActionRecord]) -> Result<FixedPointProfile> {
    let mut f = BTreeMap::new();
    let mut used = Vec::new();
    for n in 2..=MAX_SYMPLECTIC_ORDER {
        let r = records
            .iter()
            .find(|r| r.group_order == n as u64 && is_cyclic_record(r))
            .ok_or_else(|| Error::Domain(format!("no cyclic record of order {n}")))?;
        let step = format!("fixed points of order {n} ({})", r.name);
        if !xiao_consistency(&r.config, r.group_order) {
            return Err(Error::inconsistent(&step, format!("config {} fails Xiao's formula", r.config)));
        }
        let k = solve_full_stabilizer_points(r)?;
        if !k.is_integer() || k.is_negative() {
            return Err(Error::inconsistent(&step, format!("Xiao's formula gives k = {k}")));
        }
        let k = k.to_integer();
        let actual = r.config.multiplicity(RootComponent::a(n as usize - 1));
        if k != BigInt::from(actual) {
            return Err(Error::inconsistent(
                &step,
                format!("Xiao's formula gives {k} points with full stabilizer, config has {actual}"),
            ));
        }
        f.insert(n, actual as u64);
        used.push(r);
    }
    let profile = FixedPointProfile::new(f);
    for r in used {
        let census = r.census.as_ref().expect("cyclic records carry a census");
        let via_group = rank_from_group(census, r.group_order, &profile)?;
        if via_group != r.rank() {
            return Err(Error::inconsistent(
                format!("rank cross-check ({})", r.name),
                format!("fixed-point formula gives {via_group}, config gives {}", r.rank()),
            ));
        }
    }
    Ok(profile)
}

/// Everything the chain computes for one record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub name: String,
    pub group_order: u64,
    pub config: AdeConfig,
    pub rank_sg: usize,
    pub rank_h2g: usize,
    pub glue_index: u64,
    pub h3_order: u64,
    pub d_k: BigInt,
    pub d_m: BigInt,
    pub d_j: BigInt,
    pub d_h2g: BigInt,
    pub d_sg: BigInt,
    pub xiao_ok: bool,
    /// `None` when the record has no census.
    pub rank_cross_ok: Option<bool>,
    pub sign_ok: bool,
    pub assumptions: Vec<String>,
}

impl InvariantReport {
    /// `(label, value)` pairs of the chain in order.
    pub fn chain(&self) -> [(&'static str, &BigInt); 5] {
        [
            ("d_k", &self.d_k),
            ("d_m", &self.d_m),
            ("d_j", &self.d_j),
            ("d_h2g", &self.d_h2g),
            ("d_sg", &self.d_sg),
        ]
    }

    pub fn value(&self, quantity: &str) -> Option<&BigInt> {
        self.chain().into_iter().find(|(k, _)| *k == quantity).map(|(_, v)| v)
    }
}

#[derive(Serialize)]
struct FactoredInt {
    value: String,
    factored: String,
}

impl From<&BigInt> for FactoredInt {
    fn from(n: &BigInt) -> Self {
        FactoredInt { value: n.to_string(), factored: factored(n) }
    }
}

impl Serialize for InvariantReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            name: &'a str,
            group_order: u64,
            config: &'a AdeConfig,
            rank_sg: usize,
            rank_h2g: usize,
            glue_index: u64,
            h3_order: u64,
            d_k: FactoredInt,
            d_m: FactoredInt,
            d_j: FactoredInt,
            d_h2g: FactoredInt,
            d_sg: FactoredInt,
            xiao_ok: bool,
            rank_cross_ok: Option<bool>,
            sign_ok: bool,
            assumptions: &'a [String],
        }
        Out {
            name: &self.name,
            group_order: self.group_order,
            config: &self.config,
            rank_sg: self.rank_sg,
            rank_h2g: self.rank_h2g,
            glue_index: self.glue_index,
            h3_order: self.h3_order,
            d_k: (&self.d_k).into(),
            d_m: (&self.d_m).into(),
            d_j: (&self.d_j).into(),
            d_h2g: (&self.d_h2g).into(),
            d_sg: (&self.d_sg).into(),
            xiao_ok: self.xiao_ok,
            rank_cross_ok: self.rank_cross_ok,
            sign_ok: self.sign_ok,
            assumptions: &self.assumptions,
        }
        .serialize(s)
    }
}

fn exact_div(num: &BigInt, den: &BigInt, step: &str, what: &str) -> Result<BigInt> {
    let (q, r) = num.div_rem(den);
    if !r.is_zero() {
        return Err(Error::inconsistent(step, format!("{what} ({num} / {den} is not integral)")));
    }
    Ok(q)
}

fn sign_of(n: &BigInt) -> i32 {
    if n.is_negative() {
        -1
    } else {
        1
    }
}

/// Runs the discriminant chain with the standard fixed-point profile.
pub fn discriminant_chain(rec: &ActionRecord) -> Result<InvariantReport> {
    discriminant_chain_with(rec, &FixedPointProfile::standard())
}

pub fn discriminant_chain_with(rec: &ActionRecord, f: &FixedPointProfile) -> Result<InvariantReport> {
    rec.validate()?;
    let glue = rec.glue_index.ok_or_else(|| {
        Error::Domain(format!("record `{}` has no glue_index; supply [M:K] to run the chain", rec.name))
    })?;
    let h3 = rec.h3_order.ok_or_else(|| {
        Error::Domain(format!("record `{}` has no h3_order; supply |H^3(G,Z)| to run the chain", rec.name))
    })?;
    let r = rec.rank();
    let d_k = rec.config.lattice().det();
    let glue_sq = BigInt::from(glue).pow(2u32);
    let d_m = exact_div(&d_k, &glue_sq, "d(M)", "d(K) not divisible by glue²")?;
    let g_pow = BigInt::from(rec.group_order).pow((22 - r) as u32);
    let d_j = -exact_div(&g_pow, &d_m, "d(J)", "|G|^(22-r) not divisible by d(M)")?;
    let h3_sq = BigInt::from(h3).pow(2u32);
    let d_h2g = exact_div(&d_j, &h3_sq, "d(H2G)", "d(J) not divisible by |H³|²")?;
    let d_sg = BigInt::from(det_sign(0, r)) * d_h2g.abs();

    let complement_sign = det_sign(3, 19 - r);
    let sign_ok = sign_of(&d_k) == det_sign(0, r)
        && sign_of(&d_j) == complement_sign
        && sign_of(&d_h2g) == complement_sign;
    let rank_cross_ok = match &rec.census {
        Some(c) => Some(rank_from_group(c, rec.group_order, f).map(|v| v == r).unwrap_or(false)),
        None => None,
    };
    Ok(InvariantReport {
        name: rec.name.clone(),
        group_order: rec.group_order,
        config: rec.config.clone(),
        rank_sg: r,
        rank_h2g: 22 - r,
        glue_index: glue,
        h3_order: h3,
        d_k,
        d_m,
        d_j,
        d_h2g,
        d_sg,
        xiao_ok: xiao_consistency(&rec.config, rec.group_order),
        rank_cross_ok,
        sign_ok,
        assumptions: vec![COKERNEL_ASSUMPTION.to_string()],
    })
}

/// `[M : K]`, the order of the glue group `M/K`.
pub fn glue_quotient_order(rec: &ActionRecord) -> Result<u64> {
    rec.glue_index
        .ok_or_else(|| Error::Domain(format!("record `{}` has no glue_index", rec.name)))
}

/// Whether `q_K` has an isotropic subgroup of order `[M : K]`, as an even
/// overlattice of that index requires.
pub fn glue_witness(rec: &ActionRecord) -> Result<bool> {
    let glue = glue_quotient_order(rec)?;
    let q = disc_form(&rec.config.lattice())?;
    if q.group_order() % glue != 0 {
        return Ok(false);
    }
    Ok(!isotropic_subgroups(&q, glue)?.is_empty())
}

/// A singularity table: group name and configuration.
pub type ConfigTable = Vec<(String, AdeConfig)>;

fn table(rows: &[(&str, &str)]) -> ConfigTable {
    rows.iter()
        .map(|(g, c)| (g.to_string(), c.parse().expect("built-in configuration parses")))
        .collect()
}

/// The torus-quotient singularity table and the perfect-group table.
pub fn torus_quotient_tables() -> (ConfigTable, ConfigTable) {
    let torus = table(&[
        ("C2", "16*A1"),
        ("C3", "9*A2"),
        ("C4", "4*A3,6*A1"),
        ("C6", "A5,4*A2,5*A1"),
        ("Q8", "4*D4,3*A1"),
        ("Q12", "D5,3*A3,2*A2,A1"),
        ("T24", "A5,2*A3,4*A2"),
        ("T24", "E6,D4,4*A2,A1"),
    ]);
    let perfect = table(&[
        ("A5", "2*A4,3*A2,4*A1"),
        ("L2(7)", "A6,2*A3,3*A2,A1"),
        ("A6", "2*A4,2*A3,2*A2,A1"),
        ("M20", "D4,2*A4,3*A2,A1"),
    ]);
    (torus, perfect)
}

/// True when no configuration appears in both tables.
pub fn tables_disjoint(a: &ConfigTable, b: &ConfigTable) -> bool {
    a.iter().all(|(_, x)| b.iter().all(|(_, y)| x != y))
}

/// Disjointness of the torus table against the perfect-group table together
/// with every shipped record configuration.
pub fn shipped_tables_disjoint() -> bool {
    let (torus, mut symplectic) = torus_quotient_tables();
    symplectic.extend(shipped_records().into_iter().map(|r| (r.name, r.config)));
    tables_disjoint(&torus, &symplectic)
}

/// A published value to compare against the computed chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValue {
    pub record: String,
    pub quantity: String,
    pub value: String,
    pub source: String,
}

/// Result of comparing one computed chain value with a published one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReferenceCheck {
    pub record: String,
    pub quantity: String,
    pub computed: String,
    pub reference: String,
    pub agrees: bool,
    pub note: String,
}

pub fn shipped_reference_values() -> Vec<ReferenceValue> {
    serde_json::from_str(SHIPPED_REFERENCES).expect("bundled reference values parse")
}

/// Compares a report against every reference value for its record.
pub fn compare_references(report: &InvariantReport, refs: &[ReferenceValue]) -> Result<Vec<ReferenceCheck>> {
    let mut out = Vec::new();
    for rv in refs.iter().filter(|rv| rv.record == report.name) {
        let computed = report
            .value(&rv.quantity)
            .ok_or_else(|| Error::Parse(format!("unknown chain quantity `{}`", rv.quantity)))?;
        let reference: BigInt = rv
            .value
            .parse()
            .map_err(|_| Error::Parse(format!("bad reference value `{}`", rv.value)))?;
        out.push(ReferenceCheck {
            record: rv.record.clone(),
            quantity: rv.quantity.clone(),
            computed: computed.to_string(),
            reference: reference.to_string(),
            agrees: *computed == reference,
            note: rv.source.clone(),
        });
    }
    Ok(out)
}

/// The trivial action: empty configuration, `|G| = 1`.
pub fn trivial_record() -> ActionRecord {
    ActionRecord {
        name: "1".into(),
        group_order: 1,
        census: Some(OrderCensus::default()),
        config: AdeConfig::empty(),
        glue_index: Some(1),
        h3_order: Some(1),
        provenance: "trivial group".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str) -> ActionRecord {
        shipped_records().into_iter().find(|r| r.name == name).unwrap()
    }

    fn cfg(s: &str) -> AdeConfig {
        s.parse().unwrap()
    }

    #[test]
    fn ranks_from_config() {
        assert_eq!(rank_from_config(&cfg("2*A3,3*A2,5*A1")), 17);
        assert_eq!(rank_from_config(&AdeConfig::empty()), 0);
        assert_eq!(rank_from_config(&cfg("A6,2*A3,3*A2,A1")), 19);
    }

    #[test]
    fn ranks_from_group() {
        let f = FixedPointProfile::standard();
        let s4: OrderCensus = [(2, 9), (3, 8), (4, 6)].into_iter().collect();
        assert_eq!(rank_from_group(&s4, 24, &f).unwrap(), 17);
        assert_eq!(rank_from_group(&OrderCensus::default(), 1, &f).unwrap(), 0);
        let c2: OrderCensus = [(2, 1)].into_iter().collect();
        assert_eq!(rank_from_group(&c2, 2, &f).unwrap(), 8);
    }

    #[test]
    fn rank_from_group_errors() {
        let f = FixedPointProfile::standard();
        let bad: OrderCensus = [(2, 2)].into_iter().collect();
        assert!(matches!(rank_from_group(&bad, 3, &f), Err(Error::Inconsistent { .. })));
        let big: OrderCensus = [(11, 10)].into_iter().collect();
        assert!(matches!(rank_from_group(&big, 11, &f), Err(Error::NotAdmissible(_))));
        // (24 + 3*8)/16 = 3 < 4
        let low: OrderCensus = [(2, 3)].into_iter().collect();
        assert!(matches!(rank_from_group(&low, 16, &f), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn xiao_examples() {
        assert!(xiao_consistency(&cfg("2*A3,3*A2,5*A1"), 24));
        assert!(xiao_consistency(&cfg("A6,2*A3,3*A2,A1"), 168));
        assert!(!xiao_consistency(&cfg("8*A1"), 4));
        assert_eq!(xiao_rhs(&cfg("8*A1"), 4), rat(14, 1));
    }

    #[test]
    fn profile_from_shipped_records() {
        let f = derive_fixed_point_profile(&shipped_records()).unwrap();
        assert_eq!(f, FixedPointProfile::standard());
    }

    #[test]
    fn profile_rejects_perturbed_cyclic_config() {
        let mut recs = shipped_records();
        let c3 = recs.iter_mut().find(|r| r.name == "C3").unwrap();
        c3.config = cfg("7*A2");
        assert!(matches!(derive_fixed_point_profile(&recs), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn s4_chain() {
        let r = discriminant_chain(&rec("S4")).unwrap();
        assert_eq!(r.d_k, BigInt::from(-13824));
        assert_eq!(r.d_m, BigInt::from(-3456));
        assert_eq!(r.d_j, BigInt::from(2304));
        assert_eq!(r.d_h2g, BigInt::from(576));
        assert_eq!(r.d_sg, BigInt::from(-576));
        assert!(r.xiao_ok && r.sign_ok && r.rank_cross_ok == Some(true));
    }

    #[test]
    fn l27_chain() {
        let r = discriminant_chain(&rec("L2(7)")).unwrap();
        assert_eq!(r.d_k, BigInt::from(-6048));
        assert_eq!(r.d_m, BigInt::from(-6048));
        assert_eq!(r.d_j, BigInt::from(784));
        assert_eq!(r.d_h2g, BigInt::from(196));
        assert_eq!(r.d_sg, BigInt::from(-196));
        assert_eq!(r.rank_h2g, 3);
    }

    #[test]
    fn trivial_chain() {
        let r = discriminant_chain(&trivial_record()).unwrap();
        assert_eq!(r.d_k, BigInt::from(1));
        assert_eq!(r.d_j, BigInt::from(-1));
        assert_eq!(r.d_h2g, BigInt::from(-1));
        assert_eq!(r.d_sg, BigInt::from(1));
        assert!(r.sign_ok);
    }

    #[test]
    fn c2_chain_matches_e8_2() {
        let r = discriminant_chain(&rec("C2")).unwrap();
        assert_eq!(r.d_sg, BigInt::from(256));
    }

    #[test]
    fn chain_names_failing_step() {
        let mut r = rec("S4");
        r.glue_index = Some(5);
        match discriminant_chain(&r) {
            Err(Error::Inconsistent { step, detail }) => {
                assert_eq!(step, "d(M)");
                assert!(detail.contains("d(K) not divisible by glue²"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chain_refuses_missing_fields() {
        assert!(matches!(discriminant_chain(&rec("A6")), Err(Error::Domain(_))));
        assert!(matches!(discriminant_chain(&rec("M20")), Err(Error::Domain(_))));
    }

    #[test]
    fn glue_three_on_s4_is_exact() {
        // 13824 = 2^9 3^3, so glue 3 passes every division
        let mut r = rec("S4");
        r.glue_index = Some(3);
        let rep = discriminant_chain(&r).unwrap();
        assert_eq!(rep.d_m, BigInt::from(-1536));
    }

    #[test]
    fn glue_orders() {
        assert_eq!(glue_quotient_order(&rec("L2(7)")).unwrap(), 1);
        assert_eq!(glue_quotient_order(&rec("S4")).unwrap(), 2);
        assert!(glue_witness(&rec("S4")).unwrap());
        assert!(glue_witness(&rec("C4")).unwrap());
    }

    #[test]
    fn tables() {
        let (torus, perfect) = torus_quotient_tables();
        assert!(torus.contains(&("C2".into(), cfg("16*A1"))));
        assert!(perfect.contains(&("M20".into(), cfg("D4,2*A4,3*A2,A1"))));
        assert!(tables_disjoint(&torus, &perfect));
        assert!(shipped_tables_disjoint());
        assert!(!tables_disjoint(&torus, &torus));
        assert!(torus.iter().all(|(_, c)| torus_euler_consistency(c)));
    }

    #[test]
    fn reference_comparison_flags_l27_dj() {
        let r = discriminant_chain(&rec("L2(7)")).unwrap();
        let checks = compare_references(&r, &shipped_reference_values()).unwrap();
        let dj = checks.iter().find(|c| c.quantity == "d_j").unwrap();
        assert!(!dj.agrees);
        assert_eq!(dj.computed, "784");
        assert!(checks.iter().filter(|c| c.quantity != "d_j").all(|c| c.agrees));
    }

    #[test]
    fn record_validation() {
        let mut r = rec("S4");
        r.census = Some([(2, 9), (3, 8)].into_iter().collect());
        assert!(r.validate().is_err());
        let text = r#"[{"name":"x","group_order":2,"config":"8*A1","glue_index":2,"h3_order":1,"provenance":"","extra":1}]"#;
        assert!(matches!(parse_records(text), Err(Error::Parse(_))));
    }
}
