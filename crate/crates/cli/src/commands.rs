use std::path::{Path, PathBuf};

use k3lattice::genus::{enumerate_reduced, GenusSpec};
use k3lattice::groups::{h3_bar_resolution_capped, order_census, GroupFile};
use k3lattice::pipeline::{
    compare_references, derive_fixed_point_profile, discriminant_chain, glue_witness, parse_records,
    rank_from_group, shipped_records_json, shipped_reference_values, torus_euler_consistency,
    torus_quotient_tables, tables_disjoint, xiao_consistency, ActionRecord, FixedPointProfile,
    InvariantReport, ReferenceCheck, COKERNEL_ASSUMPTION,
};
use k3lattice::{factored, genus_class_count, AdeConfig, Error, GramLattice, IntMatrix};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::selfcheck;
use crate::table::Table;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INCONSISTENT: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

/// Result of one command: text and JSON renderings plus the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

/// A command that could not produce a report.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: exit_code(&e), message: e.to_string() }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistent { .. } | Error::NotAdmissible(_) | Error::Degenerate(_) => EXIT_INCONSISTENT,
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Dimension(_) | Error::Domain(_) | Error::Parse(_) => EXIT_USAGE,
    }
}

pub fn load_records(path: Option<&Path>) -> Result<Vec<ActionRecord>, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?,
        None => shipped_records_json().to_string(),
    };
    parse_records(&text).map_err(|e| CliError::usage(format!("invalid record file: {e}")))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn is_incomplete(r: &ActionRecord) -> bool {
    r.glue_index.is_none() || r.h3_order.is_none()
}

fn missing_fields(r: &ActionRecord) -> String {
    let mut m = Vec::new();
    if r.glue_index.is_none() {
        m.push("glue_index");
    }
    if r.h3_order.is_none() {
        m.push("h3_order");
    }
    m.join(", ")
}

/// Runs the discriminant chain on every (or one named) record.
pub fn cmd_invariants(records: &[ActionRecord], filter: Option<&str>) -> Result<Outcome, CliError> {
    let selected: Vec<&ActionRecord> = records
        .iter()
        .filter(|r| filter.is_none_or(|f| r.name == f))
        .collect();
    if selected.is_empty() {
        return Err(CliError::usage(format!("no record named `{}`", filter.unwrap_or(""))));
    }
    let results: Vec<Option<Result<InvariantReport, Error>>> = selected
        .par_iter()
        .map(|r| (!is_incomplete(r)).then(|| discriminant_chain(r)))
        .collect();

    let refs = shipped_reference_values();
    let mut table = Table::new(["record", "|G|", "rank", "d(K)", "d(M)", "d(J)", "d(H2G)", "d(S_G)", "xiao", "ranks", "signs"]);
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let mut skipped = Vec::new();
    let mut checks: Vec<ReferenceCheck> = Vec::new();
    let mut code = EXIT_OK;
    for (r, res) in selected.iter().zip(results) {
        match res {
            None => skipped.push(json!({"name": r.name, "missing": missing_fields(r)})),
            Some(Ok(rep)) => {
                let cross = match rep.rank_cross_ok {
                    Some(b) => yes_no(b),
                    None => "n/a",
                };
                let mut row = vec![rep.name.clone(), rep.group_order.to_string(), rep.rank_sg.to_string()];
                row.extend(rep.chain().iter().map(|(_, v)| factored(v)));
                row.extend([yes_no(rep.xiao_ok).into(), cross.into(), yes_no(rep.sign_ok).into()]);
                table.row(row);
                checks.extend(compare_references(&rep, &refs)?);
                reports.push(rep);
            }
            Some(Err(e)) => {
                code = code.max(exit_code(&e));
                errors.push((r.name.clone(), e));
            }
        }
    }

    let mut text = table.render();
    for (name, e) in &errors {
        text.push_str(&format!("error: {name}: {e}\n"));
    }
    for s in &skipped {
        text.push_str(&format!(
            "skipped: {}: {} not supplied; add them to the record to run the chain\n",
            s["name"].as_str().unwrap_or(""),
            s["missing"].as_str().unwrap_or("")
        ));
    }
    for c in checks.iter().filter(|c| !c.agrees) {
        text.push_str(&format!(
            "discrepancy: {} {} computed {} ({}), published {} ({}); {}\n",
            c.record,
            c.quantity,
            c.computed,
            factored(&c.computed.parse().unwrap_or_default()),
            c.reference,
            factored(&c.reference.parse().unwrap_or_default()),
            c.note
        ));
    }
    if !reports.is_empty() {
        text.push_str(&format!("assumption: {COKERNEL_ASSUMPTION}\n"));
    }
    let json = json!({
        "reports": reports,
        "errors": errors.iter().map(|(n, e)| json!({"name": n, "error": e.to_string(), "exit_code": exit_code(e)})).collect::<Vec<_>>(),
        "skipped": skipped,
        "reference_checks": checks,
    });
    Ok(Outcome { text, json, code })
}

#[derive(serde::Serialize)]
struct VerifyRow {
    name: String,
    xiao: bool,
    rank_cross: Option<bool>,
    chain: &'static str,
    glue_witness: Option<bool>,
}

/// Consistency matrix over the records plus profile, tables and seeded self-checks.
pub fn cmd_verify(records: &[ActionRecord], seed: u64, cases: usize) -> Result<Outcome, CliError> {
    let std_profile = FixedPointProfile::standard();
    let rows: Vec<VerifyRow> = records
        .par_iter()
        .map(|r| {
            let rank_cross = r
                .census
                .as_ref()
                .map(|c| rank_from_group(c, r.group_order, &std_profile).map(|v| v == r.rank()).unwrap_or(false));
            let (chain, glue) = if is_incomplete(r) {
                ("skipped", None)
            } else {
                let ok = discriminant_chain(r).is_ok_and(|rep| rep.sign_ok);
                (if ok { "pass" } else { "FAIL" }, Some(glue_witness(r).unwrap_or(false)))
            };
            VerifyRow {
                name: r.name.clone(),
                xiao: xiao_consistency(&r.config, r.group_order),
                rank_cross,
                chain,
                glue_witness: glue,
            }
        })
        .collect();
    let mut t = Table::new(["record", "xiao", "rank cross-check", "chain", "glue witness"]);
    let opt = |b: Option<bool>| b.map_or("n/a", yes_no);
    for r in &rows {
        t.row([r.name.as_str(), yes_no(r.xiao), opt(r.rank_cross), r.chain, opt(r.glue_witness)]);
    }
    let mut text = t.render();

    let profile = derive_fixed_point_profile(records);
    let profile_json = match &profile {
        Ok(f) => {
            let body: Vec<String> = f.iter().map(|(n, v)| format!("{n}:{v}")).collect();
            let std_ok = *f == std_profile;
            text.push_str(&format!(
                "fixed-point profile: {{{}}} ({})\n",
                body.join(", "),
                if std_ok { "pass" } else { "FAIL: differs from the standard profile" }
            ));
            json!({"ok": std_ok, "profile": f})
        }
        Err(e) => {
            text.push_str(&format!("fixed-point profile: FAIL: {e}\n"));
            json!({"ok": false, "error": e.to_string()})
        }
    };

    let (torus, mut symplectic) = torus_quotient_tables();
    symplectic.extend(records.iter().map(|r| (r.name.clone(), r.config.clone())));
    let disjoint = tables_disjoint(&torus, &symplectic);
    text.push_str(&format!("disjoint: {disjoint}\n"));
    let euler: Vec<bool> = torus.iter().map(|(_, c)| torus_euler_consistency(c)).collect();
    let euler_ok = euler.iter().all(|&b| b);
    text.push_str(&format!("torus Euler count: {}\n", yes_no(euler_ok)));

    let checks = [selfcheck::snf_check(seed, cases), selfcheck::disc_form_check(seed, cases)];
    for c in &checks {
        text.push_str(&format!(
            "self-check {} (seed {seed}): {}/{} {}\n",
            c.name,
            c.cases - c.failures,
            c.cases,
            yes_no(c.failures == 0)
        ));
    }
    let all_pass = rows.iter().all(|r| {
        r.xiao && r.rank_cross != Some(false) && r.chain != "FAIL" && r.glue_witness != Some(false)
    }) && profile_json["ok"] == json!(true)
        && disjoint
        && euler_ok
        && checks.iter().all(|c| c.failures == 0);
    text.push_str(&format!("overall: {}\n", yes_no(all_pass)));
    let json = json!({
        "records": rows,
        "fixed_point_profile": profile_json,
        "disjoint": disjoint,
        "torus_euler": euler_ok,
        "self_checks": checks,
        "seed": seed,
        "all_pass": all_pass,
    });
    Ok(Outcome { text, json, code: EXIT_OK })
}

/// Where the target discriminant form comes from.
pub enum DiscSource {
    /// Count every class of the given rank and determinant.
    None,
    /// `-q` of the negative-definite lattice of an ADE configuration.
    Config(AdeConfig),
    /// `-q` of the lattice with the Gram matrix in a JSON file.
    Gram(PathBuf),
}

pub fn cmd_genus(rank: usize, det: u64, source: DiscSource) -> Result<Outcome, CliError> {
    let spec = match source {
        DiscSource::None => None,
        DiscSource::Config(c) => Some(GenusSpec::complement_of(&c.lattice(), rank)?),
        DiscSource::Gram(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
            let rows: Vec<Vec<i64>> = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("Gram file must be a JSON array of integer rows: {e}")))?;
            if rows.iter().any(|r| r.len() != rows.len()) {
                return Err(CliError::usage("Gram matrix must be square"));
            }
            let l = GramLattice::new(IntMatrix::from_rows(&rows))?;
            Some(GenusSpec::complement_of(&l, rank)?)
        }
    };
    if let Some(s) = &spec {
        if s.det != det {
            return Err(CliError::usage(format!(
                "--det {det} does not match the discriminant group order {}",
                s.det
            )));
        }
    }
    let (count, reps) = match &spec {
        Some(s) => genus_class_count(s)?,
        None => {
            let all = enumerate_reduced(rank, det)?;
            (all.len(), all)
        }
    };
    let mut text = match &spec {
        Some(_) => format!("classes in genus (rank {rank}, det {det}): {count}\n"),
        None => format!("isometry classes (rank {rank}, det {det}, any genus): {count}\n"),
    };
    for (i, r) in reps.iter().enumerate() {
        text.push_str(&format!("  #{}  {r}\n", i + 1));
    }
    if !reps.is_empty() {
        text.push_str("representatives are computed reduced Gram matrices, not published data\n");
    }
    let json = json!({
        "rank": rank,
        "det": det,
        "disc": spec.as_ref().map(|s| &s.disc),
        "count": count,
        "representatives": reps,
        "representatives_note": "computed by exhaustive enumeration; not published data",
    });
    Ok(Outcome { text, json, code: EXIT_OK })
}

pub fn cmd_h3(path: &Path, cap: usize) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file = GroupFile::from_json(&text)?;
    let g = file.build()?;
    let name = file.name.clone().unwrap_or_else(|| path.display().to_string());
    let h3 = h3_bar_resolution_capped(&g, cap)?;
    let census = order_census(&g).ok();
    let shown = if h3.factors.is_empty() {
        "trivial".to_string()
    } else {
        h3.factors.iter().map(|d| format!("Z/{d}")).collect::<Vec<_>>().join(" + ")
    };
    let text = format!(
        "H^3({name}, Z) = {shown}\n|G| = {}, cochain ranks C2/C3/C4 = {}/{}/{}, rank d2 = {}, rank d3 = {}\n",
        g.order(),
        h3.cochain_dims[0],
        h3.cochain_dims[1],
        h3.cochain_dims[2],
        h3.rank_d2,
        h3.rank_d3
    );
    let json = json!({
        "group": name,
        "order": g.order(),
        "census": census,
        "h3_factors": h3.factors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "h3_order": h3.order().to_string(),
        "display": shown,
    });
    Ok(Outcome { text, json, code: EXIT_OK })
}

pub fn cmd_tables() -> Outcome {
    let (torus, perfect) = torus_quotient_tables();
    let mut text = String::new();
    let mut t = Table::new(["group", "singularities of T^2/G", "rank", "Euler count"]);
    for (g, c) in &torus {
        t.row([g.clone(), c.to_string(), c.rank().to_string(), yes_no(torus_euler_consistency(c)).into()]);
    }
    text.push_str(&t.render());
    text.push('\n');
    let mut t = Table::new(["group", "symplectic configuration", "rank"]);
    for (g, c) in &perfect {
        t.row([g.clone(), c.to_string(), c.rank().to_string()]);
    }
    text.push_str(&t.render());
    let disjoint = tables_disjoint(&torus, &perfect);
    text.push_str(&format!("disjoint: {disjoint}\n"));
    let rows = |tab: &Vec<(String, AdeConfig)>| {
        tab.iter()
            .map(|(g, c)| json!({"group": g, "config": c, "rank": c.rank()}))
            .collect::<Vec<_>>()
    };
    let json = json!({"torus": rows(&torus), "perfect": rows(&perfect), "disjoint": disjoint});
    Outcome { text, json, code: EXIT_OK }
}
