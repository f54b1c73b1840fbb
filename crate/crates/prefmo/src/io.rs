//! Instance/preference document loading and deterministic result emission.
//!
//! Documents are UTF-8 JSON. Emission is canonical: object keys sorted, every
//! float printed with 17 significant digits, so identical inputs and seeds
//! reproduce identical output bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mdp::{History, MdpInstance, Policy, RewardSpec};

pub const SCHEMA_VERSION: u64 = 1;

/// Optional preference block attached to an instance document.
#[derive(Debug, Clone, PartialEq)]
pub enum PreferenceSpec {
    /// Label permutation, worst to best (0-based in memory, 1-based on disk).
    OrderedRewards(Vec<usize>),
    /// Reference histories h_1 ... h_d.
    OrderedHistories(Vec<History>),
}

#[derive(Debug, Clone)]
pub struct LoadedDocument {
    pub mdp: MdpInstance,
    pub preference: Option<PreferenceSpec>,
    pub state_names: Vec<String>,
    pub action_names: Vec<String>,
}

fn schema_err(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema_err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema_err(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| schema_err(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema_err(path, "expected a nonnegative integer"))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema_err(path, format!("missing required field `{key}`")))
}

fn check_fields(
    obj: &Map<String, Value>,
    allowed: &[&str],
    path: &str,
    strict: bool,
) -> Result<()> {
    let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
    for key in obj.keys() {
        if !allowed.contains(key.as_str()) {
            if strict {
                return Err(schema_err(path, format!("unknown field `{key}`")));
            }
            eprintln!("warning: ignoring unknown field `{path}.{key}`");
        }
    }
    Ok(())
}

/// `states`/`actions` blocks: either a name list or a bare count.
fn parse_names(v: &Value, path: &str) -> Result<Vec<String>> {
    match v {
        Value::Number(_) => {
            let n = as_usize(v, path)?;
            Ok((0..n).map(|i| i.to_string()).collect())
        }
        Value::Array(items) => {
            let mut names = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let name = item
                    .as_str()
                    .ok_or_else(|| schema_err(&format!("{path}[{i}]"), "expected a string"))?;
                names.push(name.to_string());
            }
            if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
                return Err(schema_err(path, "duplicate names"));
            }
            Ok(names)
        }
        _ => Err(schema_err(path, "expected a name list or a count")),
    }
}

/// Index reference: a number, or a string resolved against the name list.
fn parse_index(v: &Value, names: &[String], path: &str) -> Result<usize> {
    match v {
        Value::Number(_) => {
            let i = as_usize(v, path)?;
            if i >= names.len() {
                return Err(schema_err(path, format!("index {i} out of range 0..{}", names.len())));
            }
            Ok(i)
        }
        Value::String(s) => names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| schema_err(path, format!("unknown name `{s}`"))),
        _ => Err(schema_err(path, "expected an index or a name")),
    }
}

fn parse_reward(
    v: &Value,
    n_states: usize,
    n_actions: usize,
    strict: bool,
) -> Result<RewardSpec> {
    let path = "reward";
    let obj = as_object(v, path)?;
    let kind = get(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| schema_err("reward.kind", "expected a string"))?;
    let flat_len = n_states * n_actions;
    match kind {
        "scalar" => {
            check_fields(obj, &["kind", "values"], path, strict)?;
            let rows = as_array(get(obj, "values", path)?, "reward.values")?;
            let mut values = Vec::with_capacity(flat_len);
            expect_rows(rows, n_states, "reward.values")?;
            for (s, row) in rows.iter().enumerate() {
                let p = format!("reward.values[{s}]");
                let row = as_array(row, &p)?;
                expect_rows(row, n_actions, &p)?;
                for (a, x) in row.iter().enumerate() {
                    values.push(as_f64(x, &format!("{p}[{a}]"))?);
                }
            }
            Ok(RewardSpec::Scalar(values))
        }
        "vector" => {
            check_fields(obj, &["kind", "dim", "values"], path, strict)?;
            let dim = as_usize(get(obj, "dim", path)?, "reward.dim")?;
            let rows = as_array(get(obj, "values", path)?, "reward.values")?;
            expect_rows(rows, n_states, "reward.values")?;
            let mut values = Vec::with_capacity(flat_len);
            for (s, row) in rows.iter().enumerate() {
                let p = format!("reward.values[{s}]");
                let row = as_array(row, &p)?;
                expect_rows(row, n_actions, &p)?;
                for (a, cell) in row.iter().enumerate() {
                    let cp = format!("{p}[{a}]");
                    let cell = as_array(cell, &cp)?;
                    expect_rows(cell, dim, &cp)?;
                    let mut vec = Vec::with_capacity(dim);
                    for (k, x) in cell.iter().enumerate() {
                        vec.push(as_f64(x, &format!("{cp}[{k}]"))?);
                    }
                    values.push(vec);
                }
            }
            Ok(RewardSpec::Vector { dim, values })
        }
        "symbolic" => {
            check_fields(obj, &["kind", "num_labels", "labels"], path, strict)?;
            let num_labels = as_usize(get(obj, "num_labels", path)?, "reward.num_labels")?;
            let rows = as_array(get(obj, "labels", path)?, "reward.labels")?;
            expect_rows(rows, n_states, "reward.labels")?;
            let mut labels = Vec::with_capacity(flat_len);
            for (s, row) in rows.iter().enumerate() {
                let p = format!("reward.labels[{s}]");
                let row = as_array(row, &p)?;
                expect_rows(row, n_actions, &p)?;
                for (a, x) in row.iter().enumerate() {
                    let lp = format!("{p}[{a}]");
                    // Labels are 1-based on disk (x_1 .. x_d).
                    let l = as_usize(x, &lp)?;
                    if l == 0 || l > num_labels {
                        return Err(schema_err(&lp, format!(
                            "label {l} out of range 1..={num_labels}"
                        )));
                    }
                    labels.push(l - 1);
                }
            }
            Ok(RewardSpec::Symbolic { num_labels, labels })
        }
        other => Err(schema_err(
            "reward.kind",
            format!("expected scalar|vector|symbolic, got `{other}`"),
        )),
    }
}

fn expect_rows(items: &[Value], expected: usize, path: &str) -> Result<()> {
    if items.len() != expected {
        return Err(schema_err(path, format!(
            "expected {expected} entries, got {}",
            items.len()
        )));
    }
    Ok(())
}

fn parse_history(v: &Value, path: &str) -> Result<History> {
    let obj = as_object(v, path)?;
    check_fields(obj, &["states", "actions"], path, true)?;
    let parse_list = |key: &str| -> Result<Vec<usize>> {
        let p = format!("{path}.{key}");
        let items = as_array(get(obj, key, path)?, &p)?;
        items
            .iter()
            .enumerate()
            .map(|(i, x)| as_usize(x, &format!("{p}[{i}]")))
            .collect()
    };
    let states = parse_list("states")?;
    let actions = parse_list("actions")?;
    History::new(states, actions)
}

fn parse_preference(v: &Value, strict: bool) -> Result<PreferenceSpec> {
    let path = "preference";
    let obj = as_object(v, path)?;
    check_fields(obj, &["ordered_rewards", "ordered_histories"], path, strict)?;
    if let Some(perm) = obj.get("ordered_rewards") {
        let p = "preference.ordered_rewards";
        let items = as_array(perm, p)?;
        let mut out = Vec::with_capacity(items.len());
        for (i, x) in items.iter().enumerate() {
            let lp = format!("{p}[{i}]");
            let l = as_usize(x, &lp)?;
            if l == 0 || l > items.len() {
                return Err(schema_err(&lp, "label out of range"));
            }
            out.push(l - 1);
        }
        let mut sorted = out.clone();
        sorted.sort_unstable();
        if sorted != (0..items.len()).collect::<Vec<_>>() {
            return Err(schema_err(p, "not a permutation"));
        }
        return Ok(PreferenceSpec::OrderedRewards(out));
    }
    if let Some(hs) = obj.get("ordered_histories") {
        let p = "preference.ordered_histories";
        let items = as_array(hs, p)?;
        let histories = items
            .iter()
            .enumerate()
            .map(|(i, h)| parse_history(h, &format!("{p}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(PreferenceSpec::OrderedHistories(histories));
    }
    Err(schema_err(
        path,
        "expected `ordered_rewards` or `ordered_histories`",
    ))
}

pub fn parse_instance(text: &str, strict: bool) -> Result<LoadedDocument> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| schema_err("$", format!("invalid JSON: {e}")))?;
    parse_instance_value(&root, strict)
}

pub fn parse_instance_value(root: &Value, strict: bool) -> Result<LoadedDocument> {
    let obj = as_object(root, "$")?;
    check_fields(
        obj,
        &[
            "schema_version",
            "states",
            "actions",
            "gamma",
            "transitions",
            "reward",
            "initial_distribution",
            "preference",
        ],
        "$",
        strict,
    )?;
    let version = as_usize(get(obj, "schema_version", "$")?, "schema_version")?;
    if version as u64 != SCHEMA_VERSION {
        return Err(schema_err(
            "schema_version",
            format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
        ));
    }
    let state_names = parse_names(get(obj, "states", "$")?, "states")?;
    let action_names = parse_names(get(obj, "actions", "$")?, "actions")?;
    let n = state_names.len();
    let na = action_names.len();
    if n == 0 || na == 0 {
        return Err(schema_err("$", "states and actions must be nonempty"));
    }
    let gamma = as_f64(get(obj, "gamma", "$")?, "gamma")?;

    let mut succ = vec![vec![Vec::new(); na]; n];
    let triples = as_array(get(obj, "transitions", "$")?, "transitions")?;
    for (i, t) in triples.iter().enumerate() {
        let p = format!("transitions[{i}]");
        let t = as_object(t, &p)?;
        check_fields(t, &["from", "action", "to", "prob"], &p, strict)?;
        let from = parse_index(get(t, "from", &p)?, &state_names, &format!("{p}.from"))?;
        let action = parse_index(get(t, "action", &p)?, &action_names, &format!("{p}.action"))?;
        let to = parse_index(get(t, "to", &p)?, &state_names, &format!("{p}.to"))?;
        let prob = as_f64(get(t, "prob", &p)?, &format!("{p}.prob"))?;
        if succ[from][action].iter().any(|&(sp, _)| sp == to) {
            return Err(schema_err(&p, format!(
                "duplicate transition (s={from}, a={action}, s'={to})"
            )));
        }
        succ[from][action].push((to, prob));
    }
    for (s, row) in succ.iter_mut().enumerate() {
        for (a, cell) in row.iter_mut().enumerate() {
            cell.sort_by_key(|&(sp, _)| sp);
            let sum: f64 = cell.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > crate::mdp::PROB_TOL {
                return Err(schema_err(
                    "transitions",
                    format!("probabilities for (s={s}, a={a}) sum to {sum}, expected 1"),
                ));
            }
        }
    }

    let reward = parse_reward(get(obj, "reward", "$")?, n, na, strict)?;

    let mu_items = as_array(
        get(obj, "initial_distribution", "$")?,
        "initial_distribution",
    )?;
    expect_rows(mu_items, n, "initial_distribution")?;
    let mu = mu_items
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("initial_distribution[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let preference = obj
        .get("preference")
        .map(|v| parse_preference(v, strict))
        .transpose()?;

    let mdp = MdpInstance::from_sparse(n, na, succ, gamma, reward, mu)?;
    if let Some(PreferenceSpec::OrderedRewards(perm)) = &preference {
        let d = match mdp.reward() {
            RewardSpec::Symbolic { num_labels, .. } => *num_labels,
            _ => {
                return Err(schema_err(
                    "preference.ordered_rewards",
                    "requires a symbolic reward",
                ))
            }
        };
        if perm.len() != d {
            return Err(schema_err(
                "preference.ordered_rewards",
                format!("expected {d} labels, got {}", perm.len()),
            ));
        }
    }
    if let Some(PreferenceSpec::OrderedHistories(hs)) = &preference {
        for (i, h) in hs.iter().enumerate() {
            mdp.validate_history(h).map_err(|e| {
                schema_err(&format!("preference.ordered_histories[{i}]"), e.to_string())
            })?;
        }
    }
    Ok(LoadedDocument {
        mdp,
        preference,
        state_names,
        action_names,
    })
}

pub fn load_instance(path: &Path, strict: bool) -> Result<LoadedDocument> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text, strict)
}

/// Instance back to document form; inverse of [`parse_instance_value`] up to
/// canonical ordering.
pub fn instance_document(doc: &LoadedDocument) -> Value {
    let mdp = &doc.mdp;
    let n = mdp.n_states();
    let na = mdp.n_actions();
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    root.insert(
        "states".into(),
        Value::Array(doc.state_names.iter().map(|s| Value::from(s.clone())).collect()),
    );
    root.insert(
        "actions".into(),
        Value::Array(doc.action_names.iter().map(|s| Value::from(s.clone())).collect()),
    );
    root.insert("gamma".into(), Value::from(mdp.discount()));
    let mut triples = Vec::new();
    for s in 0..n {
        for a in 0..na {
            for &(sp, p) in mdp.successors(s, a) {
                let mut t = Map::new();
                t.insert("from".into(), Value::from(s));
                t.insert("action".into(), Value::from(a));
                t.insert("to".into(), Value::from(sp));
                t.insert("prob".into(), Value::from(p));
                triples.push(Value::Object(t));
            }
        }
    }
    root.insert("transitions".into(), Value::Array(triples));
    let mut reward = Map::new();
    match mdp.reward() {
        RewardSpec::Scalar(values) => {
            reward.insert("kind".into(), Value::from("scalar"));
            let rows: Vec<Value> = (0..n)
                .map(|s| {
                    Value::Array(
                        (0..na).map(|a| Value::from(values[s * na + a])).collect(),
                    )
                })
                .collect();
            reward.insert("values".into(), Value::Array(rows));
        }
        RewardSpec::Vector { dim, values } => {
            reward.insert("kind".into(), Value::from("vector"));
            reward.insert("dim".into(), Value::from(*dim));
            let rows: Vec<Value> = (0..n)
                .map(|s| {
                    Value::Array(
                        (0..na)
                            .map(|a| {
                                Value::Array(
                                    values[s * na + a].iter().map(|&x| Value::from(x)).collect(),
                                )
                            })
                            .collect(),
                    )
                })
                .collect();
            reward.insert("values".into(), Value::Array(rows));
        }
        RewardSpec::Symbolic { num_labels, labels } => {
            reward.insert("kind".into(), Value::from("symbolic"));
            reward.insert("num_labels".into(), Value::from(*num_labels));
            let rows: Vec<Value> = (0..n)
                .map(|s| {
                    Value::Array(
                        (0..na).map(|a| Value::from(labels[s * na + a] + 1)).collect(),
                    )
                })
                .collect();
            reward.insert("labels".into(), Value::Array(rows));
        }
    }
    root.insert("reward".into(), Value::Object(reward));
    root.insert(
        "initial_distribution".into(),
        Value::Array(
            mdp.initial_distribution()
                .iter()
                .map(|&p| Value::from(p))
                .collect(),
        ),
    );
    if let Some(pref) = &doc.preference {
        let mut p = Map::new();
        match pref {
            PreferenceSpec::OrderedRewards(perm) => {
                p.insert(
                    "ordered_rewards".into(),
                    Value::Array(perm.iter().map(|&l| Value::from(l + 1)).collect()),
                );
            }
            PreferenceSpec::OrderedHistories(hs) => {
                p.insert(
                    "ordered_histories".into(),
                    Value::Array(
                        hs.iter()
                            .map(|h| {
                                let mut o = Map::new();
                                o.insert(
                                    "states".into(),
                                    Value::Array(h.states.iter().map(|&s| Value::from(s)).collect()),
                                );
                                o.insert(
                                    "actions".into(),
                                    Value::Array(
                                        h.actions.iter().map(|&a| Value::from(a)).collect(),
                                    ),
                                );
                                Value::Object(o)
                            })
                            .collect(),
                    ),
                );
            }
        }
        root.insert("preference".into(), Value::Object(p));
    }
    Value::Object(root)
}

/// Policy document: `{"kind": "deterministic", "actions": [...]}` or
/// randomized rows / mixed components.
pub fn parse_policy(root: &Value) -> Result<Policy> {
    let obj = as_object(root, "$")?;
    let kind = get(obj, "kind", "$")?
        .as_str()
        .ok_or_else(|| schema_err("kind", "expected a string"))?;
    match kind {
        "deterministic" => {
            let items = as_array(get(obj, "actions", "$")?, "actions")?;
            let actions = items
                .iter()
                .enumerate()
                .map(|(i, x)| as_usize(x, &format!("actions[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(Policy::Deterministic(actions))
        }
        "randomized" => {
            let rows = as_array(get(obj, "probs", "$")?, "probs")?;
            let probs = rows
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    let p = format!("probs[{s}]");
                    as_array(row, &p)?
                        .iter()
                        .enumerate()
                        .map(|(a, x)| as_f64(x, &format!("{p}[{a}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Policy::Randomized(probs))
        }
        "mixed" => {
            let comps = as_array(get(obj, "components", "$")?, "components")?;
            let components = comps
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let p = format!("components[{i}]");
                    let c = as_object(c, &p)?;
                    let actions = as_array(get(c, "actions", &p)?, &format!("{p}.actions"))?
                        .iter()
                        .enumerate()
                        .map(|(j, x)| as_usize(x, &format!("{p}.actions[{j}]")))
                        .collect::<Result<Vec<_>>>()?;
                    let weight = as_f64(get(c, "weight", &p)?, &format!("{p}.weight"))?;
                    Ok((actions, weight))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Policy::Mixed(components))
        }
        other => Err(schema_err(
            "kind",
            format!("expected deterministic|randomized|mixed, got `{other}`"),
        )),
    }
}

pub fn load_policy(path: &Path) -> Result<Policy> {
    let text = fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| schema_err("$", format!("invalid JSON: {e}")))?;
    parse_policy(&root)
}

/// Oracle document for elicitation: `{"x_star": [...]}`.
pub fn load_oracle(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| schema_err("$", format!("invalid JSON: {e}")))?;
    let obj = as_object(&root, "$")?;
    let items = as_array(get(obj, "x_star", "$")?, "x_star")?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("x_star[{i}]")))
        .collect()
}

/// Command run record with canonical byte emission. Wall time is deliberately
/// not part of the document so reruns are byte-identical; the CLI reports it
/// on stderr instead.
#[derive(Debug, Clone)]
pub struct ResultDocument {
    pub command: String,
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub outputs: Value,
}

impl ResultDocument {
    pub fn new(command: impl Into<String>, tolerance: f64, outputs: Value) -> Self {
        ResultDocument {
            command: command.into(),
            input_digest: None,
            seed: None,
            tolerance,
            outputs,
        }
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.input_digest = Some(digest.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        root.insert("command".into(), Value::from(self.command.clone()));
        root.insert(
            "input_digest".into(),
            self.input_digest
                .clone()
                .map(Value::from)
                .unwrap_or(Value::Null),
        );
        root.insert(
            "seed".into(),
            self.seed.map(Value::from).unwrap_or(Value::Null),
        );
        root.insert("tolerance".into(), Value::from(self.tolerance));
        root.insert("outputs".into(), self.outputs.clone());
        Value::Object(root)
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        write_canonical(&self.to_value(), &mut out);
        out.push('\n');
        out.into_bytes()
    }

    /// Writes canonical bytes to `out` (or stdout when `None`).
    pub fn emit(&self, out: Option<&Path>) -> Result<Vec<u8>> {
        let bytes = self.canonical_bytes();
        match out {
            Some(path) => fs::write(path, &bytes)?,
            None => {
                use std::io::Write;
                std::io::stdout().write_all(&bytes)?;
            }
        }
        Ok(bytes)
    }
}

/// Canonical JSON text: sorted keys (serde_json maps are ordered), floats with
/// 17 significant digits, integers verbatim, no insignificant whitespace.
pub fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let x = n.as_f64().unwrap();
                if x.is_finite() {
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            // serde_json's default map is a BTreeMap, so iteration is sorted.
            for (i, (k, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                write_canonical(val, out);
            }
            out.push('}');
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Float vectors/matrices to JSON values for result outputs.
pub fn vec_value(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::from(x)).collect())
}

pub fn mat_value(m: &[Vec<f64>]) -> Value {
    Value::Array(m.iter().map(|row| vec_value(row)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "states": ["s"],
        "actions": ["a"],
        "gamma": 0.5,
        "transitions": [{"from": "s", "action": "a", "to": "s", "prob": 1.0}],
        "reward": {"kind": "scalar", "values": [[1.0]]},
        "initial_distribution": [1.0]
    }"#;

    #[test]
    fn minimal_document_loads() {
        let doc = parse_instance(MINIMAL, true).unwrap();
        assert_eq!(doc.mdp.n_states(), 1);
        assert_eq!(doc.mdp.discount(), 0.5);
        assert_eq!(doc.mdp.scalar_reward(0, 0).unwrap(), 1.0);
    }

    #[test]
    fn bad_probability_sum_names_pair() {
        let text = MINIMAL.replace("\"prob\": 1.0", "\"prob\": 0.9");
        let err = parse_instance(&text, true).unwrap_err();
        match err {
            Error::Schema { message, .. } => {
                assert!(message.contains("(s=0, a=0)"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected_in_strict_mode() {
        let text = MINIMAL.replacen('{', "{\"bogus\": 1,", 1);
        assert!(parse_instance(&text, true).is_err());
        assert!(parse_instance(&text, false).is_ok());
    }

    #[test]
    fn round_trip_preserves_instance() {
        let doc = parse_instance(MINIMAL, true).unwrap();
        let emitted = instance_document(&doc);
        let reloaded = parse_instance_value(&emitted, true).unwrap();
        assert_eq!(doc.mdp.n_states(), reloaded.mdp.n_states());
        assert_eq!(doc.mdp.reward(), reloaded.mdp.reward());
        assert_eq!(doc.mdp.initial_distribution(), reloaded.mdp.initial_distribution());
        assert_eq!(
            doc.mdp.successors(0, 0).to_vec(),
            reloaded.mdp.successors(0, 0).to_vec()
        );
    }

    #[test]
    fn symbolic_labels_one_based_on_disk() {
        let text = r#"{
            "schema_version": 1,
            "states": 1,
            "actions": 2,
            "gamma": 0.5,
            "transitions": [
                {"from": 0, "action": 0, "to": 0, "prob": 1.0},
                {"from": 0, "action": 1, "to": 0, "prob": 1.0}
            ],
            "reward": {"kind": "symbolic", "num_labels": 2, "labels": [[1, 2]]},
            "initial_distribution": [1.0],
            "preference": {"ordered_rewards": [2, 1]}
        }"#;
        let doc = parse_instance(text, true).unwrap();
        assert_eq!(doc.mdp.symbolic_label(0, 0).unwrap(), 0);
        assert_eq!(doc.mdp.symbolic_label(0, 1).unwrap(), 1);
        assert_eq!(
            doc.preference,
            Some(PreferenceSpec::OrderedRewards(vec![1, 0]))
        );
    }

    #[test]
    fn canonical_bytes_stable_and_sorted() {
        let mut outputs = Map::new();
        outputs.insert("zeta".into(), Value::from(1.5));
        outputs.insert("alpha".into(), Value::from(2));
        let doc = ResultDocument::new("solve", 1e-9, Value::Object(outputs)).with_seed(7);
        let a = doc.canonical_bytes();
        let b = doc.canonical_bytes();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(text.contains("1.5000000000000000e0"));
    }

    #[test]
    fn digest_is_hex_sha256() {
        let d = sha256_hex(b"abc");
        assert_eq!(
            d,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
