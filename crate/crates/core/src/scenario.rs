//! Problem data model: terminals, batches, events, and event-indexed parameters.
//!
//! A [`Scenario`] is an immutable description of one planning instance. Batch
//! slots are ordered far-end-first: index 0 is the batch nearest the far end of
//! the line, the last index sits at the origin. New-batch slots are interleaved
//! with the old batches according to the `slots_behind` counts in the file
//! (any remainder goes behind the origin-most old batch).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::ScenarioError;

/// Relative tolerance on the "pipeline full" invariant, scaled by PV.
pub const FULLNESS_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

/// One value per event interval `(T_{e-1}, T_e]`; length is `|E| - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventTimeline {
    values: Vec<f64>,
}

impl EventTimeline {
    pub fn constant(value: f64, intervals: usize) -> Self {
        EventTimeline {
            values: vec![value; intervals],
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        EventTimeline { values }
    }

    pub fn intervals(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value on the interval ending at event `e` (1-based: `e > e_0`).
    pub fn at(&self, e: usize) -> Result<f64, ScenarioError> {
        if e == 0 || e > self.values.len() {
            return Err(ScenarioError::EventIndex {
                index: e,
                intervals: self.values.len(),
            });
        }
        Ok(self.values[e - 1])
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// Value of an event-indexed parameter on the interval ending at event `e`.
pub fn param_at(timeline: &EventTimeline, e: usize) -> Result<f64, ScenarioError> {
    timeline.at(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceTerminal {
    pub id: String,
    /// Volumetric coordinate from the pipeline origin.
    pub tau: f64,
    pub rate_min: EventTimeline,
    pub rate_max: EventTimeline,
    /// Pumping cost per volume unit, by product index.
    pub pump_cost: Vec<f64>,
    /// Minimum shipment per product over the horizon, if bounded.
    pub supply_min: Vec<Option<f64>>,
    /// Maximum shipment per product over the horizon, if bounded.
    pub supply_max: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTerminal {
    pub id: String,
    /// Volumetric coordinate from the pipeline origin.
    pub sigma: f64,
    /// DL: minimum request per product.
    pub demand_min: Vec<f64>,
    /// DU: maximum deliverable per product.
    pub demand_max: Vec<f64>,
    /// cb: unit backorder penalty per product.
    pub backorder_cost: Vec<f64>,
    pub delivery_min: EventTimeline,
    pub delivery_max: EventTimeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub time: f64,
    #[serde(default)]
    pub label: String,
}

/// One position in the far-end-first batch order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BatchSlot {
    /// Batch already in the line at t = 0, with known product and volume.
    Old {
        id: String,
        product: usize,
        volume: f64,
    },
    /// Reserved position for a batch the plan may create.
    New { id: String },
}

impl BatchSlot {
    pub fn id(&self) -> &str {
        match self {
            BatchSlot::Old { id, .. } | BatchSlot::New { id } => id,
        }
    }

    pub fn is_new(&self) -> bool {
        matches!(self, BatchSlot::New { .. })
    }

    pub fn initial_volume(&self) -> f64 {
        match self {
            BatchSlot::Old { volume, .. } => *volume,
            BatchSlot::New { .. } => 0.0,
        }
    }

    pub fn old_product(&self) -> Option<usize> {
        match self {
            BatchSlot::Old { product, .. } => Some(*product),
            BatchSlot::New { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub pipeline_volume: f64,
    pub horizon: f64,
    pub products: Vec<Product>,
    pub sources: Vec<SourceTerminal>,
    /// Sorted ascending by sigma.
    pub depots: Vec<OutputTerminal>,
    /// Far-end-first order, old and new slots interleaved.
    pub batches: Vec<BatchSlot>,
    /// Strictly increasing times; first at 0, last at `horizon`.
    pub events: Vec<Event>,
    /// cif\[pred]\[succ], by product index.
    pub interface_cost: Vec<Vec<f64>>,
    /// (pred, succ) product pairs that must not be adjacent.
    pub forbidden_pairs: Vec<(usize, usize)>,
    pub batch_size_min: f64,
    pub batch_size_max: f64,
    pub run_count: usize,
    pub new_batch_count: usize,
}

impl Scenario {
    pub fn intervals(&self) -> usize {
        self.events.len() - 1
    }

    pub fn product_index(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p.id == id)
    }

    pub fn source_index(&self, id: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.id == id)
    }

    pub fn depot_index(&self, id: &str) -> Option<usize> {
        self.depots.iter().position(|d| d.id == id)
    }

    pub fn batch_index(&self, id: &str) -> Option<usize> {
        self.batches.iter().position(|b| b.id() == id)
    }

    /// Initial upper coordinate of slot `i`: the sum of initial volumes of all
    /// slots at index >= i (new slots contribute nothing).
    pub fn initial_position(&self, i: usize) -> f64 {
        self.batches[i..].iter().map(|b| b.initial_volume()).sum()
    }

    /// Event interval (1-based) containing time `t`, treating interval e as
    /// `(T_{e-1}, T_e]` and mapping t = 0 into the first interval.
    pub fn interval_of(&self, t: f64) -> usize {
        for e in 1..self.events.len() {
            if t <= self.events[e].time {
                return e;
            }
        }
        self.events.len() - 1
    }

    pub fn event_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Scalar-or-vector field: scalars broadcast to all event intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    fn to_timeline(&self, intervals: usize, field: &str) -> Result<EventTimeline, ScenarioError> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(EventTimeline::constant(*v, intervals)),
            ScalarOrVec::Vec(vs) => {
                if vs.len() != intervals {
                    return Err(ScenarioError::Schema {
                        field: field.to_string(),
                        detail: format!(
                            "event-indexed vector has length {}, expected |events|-1 = {}",
                            vs.len(),
                            intervals
                        ),
                    });
                }
                Ok(EventTimeline::from_values(vs.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SourceFile {
    id: String,
    tau: f64,
    rate_min: ScalarOrVec,
    rate_max: ScalarOrVec,
    pump_cost: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    supply_min: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    supply_max: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DepotFile {
    id: String,
    sigma: f64,
    #[serde(default)]
    demand_min: BTreeMap<String, f64>,
    #[serde(default)]
    demand_max: BTreeMap<String, f64>,
    #[serde(default)]
    backorder_cost: BTreeMap<String, f64>,
    #[serde(default)]
    delivery_min: Option<ScalarOrVec>,
    #[serde(default)]
    delivery_max: Option<ScalarOrVec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OldBatchFile {
    id: String,
    product: String,
    volume: f64,
    /// New-batch slots between this batch and the next one toward the origin.
    #[serde(default)]
    slots_behind: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InterfaceCostFile {
    pred: String,
    succ: String,
    cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BatchSizeFile {
    #[serde(default)]
    min: f64,
    max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    comment: String,
    pipeline_volume: f64,
    horizon: f64,
    products: Vec<Product>,
    sources: Vec<SourceFile>,
    depots: Vec<DepotFile>,
    old_batches: Vec<OldBatchFile>,
    events: Vec<Event>,
    #[serde(default)]
    interface_costs: Vec<InterfaceCostFile>,
    #[serde(default)]
    forbidden_pairs: Vec<(String, String)>,
    batch_size: BatchSizeFile,
    run_count: usize,
    new_batch_count: usize,
}

fn require_product<'a>(
    products: &'a [Product],
    id: &str,
    field: &str,
) -> Result<usize, ScenarioError> {
    products
        .iter()
        .position(|p| p.id == id)
        .ok_or_else(|| ScenarioError::Schema {
            field: field.to_string(),
            detail: format!("unknown product id `{id}`"),
        })
}

fn product_map(
    map: &BTreeMap<String, f64>,
    products: &[Product],
    default: f64,
    field: &str,
) -> Result<Vec<f64>, ScenarioError> {
    let mut out = vec![default; products.len()];
    for (id, v) in map {
        out[require_product(products, id, field)?] = *v;
    }
    Ok(out)
}

fn product_map_opt(
    map: &BTreeMap<String, f64>,
    products: &[Product],
    field: &str,
) -> Result<Vec<Option<f64>>, ScenarioError> {
    let mut out = vec![None; products.len()];
    for (id, v) in map {
        out[require_product(products, id, field)?] = Some(*v);
    }
    Ok(out)
}

fn resolve(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.events.len() < 2 {
        return Err(ScenarioError::Schema {
            field: "events".into(),
            detail: "at least two events (horizon start and end) are required".into(),
        });
    }
    let intervals = file.events.len() - 1;
    let products = file.products;

    let mut sources = Vec::with_capacity(file.sources.len());
    for s in &file.sources {
        sources.push(SourceTerminal {
            id: s.id.clone(),
            tau: s.tau,
            rate_min: s.rate_min.to_timeline(intervals, "sources.rate_min")?,
            rate_max: s.rate_max.to_timeline(intervals, "sources.rate_max")?,
            pump_cost: product_map(&s.pump_cost, &products, 0.0, "sources.pump_cost")?,
            supply_min: product_map_opt(&s.supply_min, &products, "sources.supply_min")?,
            supply_max: product_map_opt(&s.supply_max, &products, "sources.supply_max")?,
        });
    }

    let mut depots = Vec::with_capacity(file.depots.len());
    for d in &file.depots {
        let delivery_min = match &d.delivery_min {
            Some(v) => v.to_timeline(intervals, "depots.delivery_min")?,
            None => EventTimeline::constant(0.0, intervals),
        };
        let delivery_max = match &d.delivery_max {
            Some(v) => v.to_timeline(intervals, "depots.delivery_max")?,
            None => EventTimeline::constant(file.pipeline_volume, intervals),
        };
        depots.push(OutputTerminal {
            id: d.id.clone(),
            sigma: d.sigma,
            demand_min: product_map(&d.demand_min, &products, 0.0, "depots.demand_min")?,
            demand_max: product_map(&d.demand_max, &products, 0.0, "depots.demand_max")?,
            backorder_cost: product_map(
                &d.backorder_cost,
                &products,
                0.0,
                "depots.backorder_cost",
            )?,
            delivery_min,
            delivery_max,
        });
    }
    depots.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));

    // Interleave new-batch slots after each old batch per slots_behind; any
    // unplaced remainder goes behind the origin-most old batch.
    let placed: usize = file
        .old_batches
        .iter()
        .map(|b| b.slots_behind.unwrap_or(0))
        .sum();
    if placed > file.new_batch_count {
        return Err(ScenarioError::Schema {
            field: "old_batches.slots_behind".into(),
            detail: format!(
                "slots_behind places {} slots but new_batch_count is {}",
                placed, file.new_batch_count
            ),
        });
    }
    let mut batches = Vec::new();
    let mut next_new = 1usize;
    let n_old = file.old_batches.len();
    for (pos, ob) in file.old_batches.iter().enumerate() {
        batches.push(BatchSlot::Old {
            id: ob.id.clone(),
            product: require_product(&products, &ob.product, "old_batches.product")?,
            volume: ob.volume,
        });
        let mut behind = ob.slots_behind.unwrap_or(0);
        if pos + 1 == n_old {
            behind += file.new_batch_count - placed;
        }
        for _ in 0..behind {
            batches.push(BatchSlot::New {
                id: format!("N{next_new}"),
            });
            next_new += 1;
        }
    }

    let mut interface_cost = vec![vec![0.0; products.len()]; products.len()];
    for ic in &file.interface_costs {
        let p = require_product(&products, &ic.pred, "interface_costs.pred")?;
        let q = require_product(&products, &ic.succ, "interface_costs.succ")?;
        interface_cost[p][q] = ic.cost;
    }

    let mut forbidden_pairs = Vec::new();
    for (a, b) in &file.forbidden_pairs {
        forbidden_pairs.push((
            require_product(&products, a, "forbidden_pairs")?,
            require_product(&products, b, "forbidden_pairs")?,
        ));
    }

    Ok(Scenario {
        pipeline_volume: file.pipeline_volume,
        horizon: file.horizon,
        products,
        sources,
        depots,
        batches,
        events: file.events,
        interface_cost,
        forbidden_pairs,
        batch_size_min: file.batch_size.min,
        batch_size_max: file.batch_size.max,
        run_count: file.run_count,
        new_batch_count: file.new_batch_count,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_scenario_str(&text)
}

pub fn load_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })?;
    resolve(file)
}

/// Serializes a resolved scenario back to the file format (timelines written
/// in full). `load_scenario_str(save_scenario(s)) == s` field-for-field.
pub fn save_scenario(s: &Scenario) -> String {
    let tl = |t: &EventTimeline| -> ScalarOrVec { ScalarOrVec::Vec(t.values().to_vec()) };
    let pm = |v: &[f64]| -> BTreeMap<String, f64> {
        v.iter()
            .enumerate()
            .map(|(i, &c)| (s.products[i].id.clone(), c))
            .collect()
    };
    let pm_opt = |v: &[Option<f64>]| -> BTreeMap<String, f64> {
        v.iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (s.products[i].id.clone(), c)))
            .collect()
    };

    // Recover slots_behind counts from the interleaved order.
    let mut old_batches = Vec::new();
    let mut i = 0;
    while i < s.batches.len() {
        if let BatchSlot::Old {
            id,
            product,
            volume,
        } = &s.batches[i]
        {
            let mut behind = 0;
            let mut j = i + 1;
            while j < s.batches.len() && s.batches[j].is_new() {
                behind += 1;
                j += 1;
            }
            let last_old = j >= s.batches.len();
            old_batches.push(OldBatchFile {
                id: id.clone(),
                product: s.products[*product].id.clone(),
                volume: *volume,
                // Trailing slots are implied for the origin-most batch.
                slots_behind: if last_old || behind == 0 {
                    None
                } else {
                    Some(behind)
                },
            });
            i = j;
        } else {
            i += 1;
        }
    }

    let mut interface_costs = Vec::new();
    for (p, row) in s.interface_cost.iter().enumerate() {
        for (q, &c) in row.iter().enumerate() {
            if c != 0.0 {
                interface_costs.push(InterfaceCostFile {
                    pred: s.products[p].id.clone(),
                    succ: s.products[q].id.clone(),
                    cost: c,
                });
            }
        }
    }

    let file = ScenarioFile {
        comment: String::new(),
        pipeline_volume: s.pipeline_volume,
        horizon: s.horizon,
        products: s.products.clone(),
        sources: s
            .sources
            .iter()
            .map(|src| SourceFile {
                id: src.id.clone(),
                tau: src.tau,
                rate_min: tl(&src.rate_min),
                rate_max: tl(&src.rate_max),
                pump_cost: pm(&src.pump_cost),
                supply_min: pm_opt(&src.supply_min),
                supply_max: pm_opt(&src.supply_max),
            })
            .collect(),
        depots: s
            .depots
            .iter()
            .map(|d| DepotFile {
                id: d.id.clone(),
                sigma: d.sigma,
                demand_min: pm(&d.demand_min),
                demand_max: pm(&d.demand_max),
                backorder_cost: pm(&d.backorder_cost),
                delivery_min: Some(tl(&d.delivery_min)),
                delivery_max: Some(tl(&d.delivery_max)),
            })
            .collect(),
        old_batches,
        events: s.events.clone(),
        interface_costs,
        forbidden_pairs: s
            .forbidden_pairs
            .iter()
            .map(|&(a, b)| (s.products[a].id.clone(), s.products[b].id.clone()))
            .collect(),
        batch_size: BatchSizeFile {
            min: s.batch_size_min,
            max: s.batch_size_max,
        },
        run_count: s.run_count,
        new_batch_count: s.new_batch_count,
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.detail)
    }
}

fn push(violations: &mut Vec<Violation>, field: &str, detail: String) {
    violations.push(Violation {
        field: field.to_string(),
        detail,
    });
}

/// Checks every structural invariant of the data model. An empty list means
/// the scenario is accepted by every downstream module.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut v = Vec::new();
    let pv = s.pipeline_volume;

    if !(pv > 0.0) {
        push(&mut v, "pipeline_volume", format!("must be positive, got {pv}"));
    }
    if !(s.horizon > 0.0) {
        push(&mut v, "horizon", format!("must be positive, got {}", s.horizon));
    }
    if s.run_count < 1 {
        push(&mut v, "run_count", "at least one pumping run is required".into());
    }

    let mut ids = std::collections::HashSet::new();
    for p in &s.products {
        if !ids.insert(&p.id) {
            push(&mut v, "products", format!("duplicate product id `{}`", p.id));
        }
    }

    // Events: strictly increasing, anchored at 0 and horizon.
    for w in s.events.windows(2) {
        if w[1].time <= w[0].time {
            push(
                &mut v,
                "events",
                format!(
                    "events must be strictly increasing in time: `{}` at {} precedes `{}` at {}",
                    w[0].id, w[0].time, w[1].id, w[1].time
                ),
            );
        }
    }
    if let Some(first) = s.events.first() {
        if first.time != 0.0 {
            push(&mut v, "events", format!("first event must be at t=0, got {}", first.time));
        }
    }
    if let Some(last) = s.events.last() {
        if (last.time - s.horizon).abs() > 1e-9 {
            push(
                &mut v,
                "events",
                format!("last event must be at the horizon {}, got {}", s.horizon, last.time),
            );
        }
    }

    let intervals = s.intervals();
    for src in &s.sources {
        if !(0.0 <= src.tau && src.tau < pv) {
            push(
                &mut v,
                "sources.tau",
                format!("source `{}` coordinate {} outside [0, PV)", src.id, src.tau),
            );
        }
        if src.rate_min.intervals() != intervals || src.rate_max.intervals() != intervals {
            push(
                &mut v,
                "sources.rate",
                format!("source `{}` timelines must have {} intervals", src.id, intervals),
            );
        }
        for e in 1..=intervals {
            let lo = src.rate_min.at(e).unwrap_or(f64::NAN);
            let hi = src.rate_max.at(e).unwrap_or(f64::NAN);
            if !(0.0 <= lo && lo <= hi) {
                push(
                    &mut v,
                    "sources.rate",
                    format!(
                        "source `{}` interval {}: need 0 <= rate_min <= rate_max, got [{lo}, {hi}]",
                        src.id, e
                    ),
                );
            }
        }
        for (p, &c) in src.pump_cost.iter().enumerate() {
            if c < 0.0 {
                push(
                    &mut v,
                    "sources.pump_cost",
                    format!("source `{}` product `{}`: negative cost {c}", src.id, s.products[p].id),
                );
            }
        }
    }

    for d in &s.depots {
        if !(0.0 < d.sigma && d.sigma <= pv) {
            push(
                &mut v,
                "depots.sigma",
                format!("depot `{}` coordinate {} outside (0, PV]", d.id, d.sigma),
            );
        }
        for p in 0..s.products.len() {
            if d.demand_min[p] > d.demand_max[p] {
                push(
                    &mut v,
                    "depots.demand",
                    format!(
                        "depot `{}` product `{}`: DL {} exceeds DU {}",
                        d.id, s.products[p].id, d.demand_min[p], d.demand_max[p]
                    ),
                );
            }
            if d.backorder_cost[p] < 0.0 {
                push(
                    &mut v,
                    "depots.backorder_cost",
                    format!("depot `{}` product `{}`: negative cost", d.id, s.products[p].id),
                );
            }
        }
    }
    for w in s.depots.windows(2) {
        if w[0].sigma > w[1].sigma {
            push(&mut v, "depots", "depots must be sorted ascending by sigma".into());
        }
    }
    if let Some(max_sigma) = s.depots.iter().map(|d| d.sigma).fold(None, |m: Option<f64>, x| {
        Some(m.map_or(x, |m| m.max(x)))
    }) {
        if max_sigma > pv {
            push(
                &mut v,
                "pipeline_volume",
                format!("PV {} is smaller than the farthest depot at {}", pv, max_sigma),
            );
        }
    }

    // Old batches fill the line exactly at t = 0.
    let total: f64 = s.batches.iter().map(|b| b.initial_volume()).sum();
    if (total - pv).abs() > FULLNESS_REL_TOL * pv {
        push(
            &mut v,
            "old_batches",
            format!("pipeline not full at t=0: initial volumes sum to {total}, PV is {pv}"),
        );
    }
    for b in &s.batches {
        if let BatchSlot::Old { id, volume, .. } = b {
            if *volume <= 0.0 {
                push(&mut v, "old_batches", format!("batch `{id}` volume must be positive"));
            }
        }
    }
    let mut bids = std::collections::HashSet::new();
    for b in &s.batches {
        if !bids.insert(b.id().to_string()) {
            push(&mut v, "batches", format!("duplicate batch id `{}`", b.id()));
        }
    }
    let new_count = s.batches.iter().filter(|b| b.is_new()).count();
    if new_count != s.new_batch_count {
        push(
            &mut v,
            "new_batch_count",
            format!("{} new slots materialized but new_batch_count is {}", new_count, s.new_batch_count),
        );
    }

    for &(a, b) in &s.forbidden_pairs {
        if a == b {
            push(
                &mut v,
                "forbidden_pairs",
                format!("pair ({}, {}) must have distinct products", s.products[a].id, s.products[b].id),
            );
        }
    }
    for row in &s.interface_cost {
        for &c in row {
            if c < 0.0 {
                push(&mut v, "interface_costs", format!("negative interface cost {c}"));
            }
        }
    }
    if s.batch_size_min < 0.0 || s.batch_size_min > s.batch_size_max {
        push(
            &mut v,
            "batch_size",
            format!("need 0 <= min <= max, got [{}, {}]", s.batch_size_min, s.batch_size_max),
        );
    }

    v
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn case_study_text() -> &'static str {
        include_str!("../data/case_study.json")
    }

    #[test]
    fn case_study_loads_and_validates() {
        let s = load_scenario_str(case_study_text()).unwrap();
        assert_eq!(s.products.len(), 3);
        assert_eq!(s.sources.len(), 2);
        assert_eq!(s.sources[0].tau, 0.0);
        assert_eq!(s.sources[1].tau, 40.0);
        assert_eq!(s.depots.len(), 3);
        assert_eq!(
            s.depots.iter().map(|d| d.sigma).collect::<Vec<_>>(),
            vec![20.0, 60.0, 80.0]
        );
        assert_eq!(s.pipeline_volume, 80.0);
        assert_eq!(s.run_count, 9);
        assert_eq!(s.new_batch_count, 6);
        assert_eq!(s.batches.len(), 10);
        assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    }

    #[test]
    fn scalar_rate_broadcasts() {
        let mut s = load_scenario_str(case_study_text()).unwrap();
        s.events = vec![
            Event { id: "e0".into(), time: 0.0, label: String::new() },
            Event { id: "e1".into(), time: 10.0, label: String::new() },
            Event { id: "e2".into(), time: 20.0, label: String::new() },
            Event { id: "emax".into(), time: 250.0, label: String::new() },
        ];
        // Re-resolve from text with patched events to exercise broadcast.
        let mut file: serde_json::Value = serde_json::from_str(case_study_text()).unwrap();
        file["events"] = serde_json::json!([
            {"id": "e0", "time": 0.0},
            {"id": "e1", "time": 10.0},
            {"id": "e2", "time": 20.0},
            {"id": "emax", "time": 250.0}
        ]);
        let s = load_scenario_str(&file.to_string()).unwrap();
        assert_eq!(s.sources[0].rate_max.values(), &[1.2, 1.2, 1.2]);
    }

    #[test]
    fn missing_field_names_it() {
        let err = load_scenario_str(r#"{"horizon": 10}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("pipeline_volume"), "{msg}");
    }

    #[test]
    fn param_at_returns_interval_values() {
        let t = EventTimeline::from_values(vec![1.2, 0.0, 1.2]);
        assert_eq!(param_at(&t, 1).unwrap(), 1.2);
        assert_eq!(param_at(&t, 2).unwrap(), 0.0);
        assert_eq!(param_at(&t, 3).unwrap(), 1.2);
        assert!(param_at(&t, 0).is_err());
        assert!(param_at(&t, 4).is_err());
    }

    #[test]
    fn underfull_pipeline_is_flagged() {
        let mut s = load_scenario_str(case_study_text()).unwrap();
        if let BatchSlot::Old { volume, .. } = &mut s.batches[0] {
            *volume -= 1.0;
        }
        let vs = validate(&s);
        assert!(vs.iter().any(|v| v.detail.contains("pipeline not full")), "{vs:?}");
    }

    #[test]
    fn misordered_events_are_flagged() {
        let mut s = load_scenario_str(case_study_text()).unwrap();
        s.events.insert(
            1,
            Event { id: "late".into(), time: 300.0, label: String::new() },
        );
        let vs = validate(&s);
        assert!(vs.iter().any(|v| v.field == "events"), "{vs:?}");
    }

    #[test]
    fn save_load_round_trip() {
        let s = load_scenario_str(case_study_text()).unwrap();
        let saved = save_scenario(&s);
        let reloaded = load_scenario_str(&saved).unwrap();
        assert_eq!(s, reloaded);
    }

    #[test]
    fn initial_positions_tile_the_line() {
        let s = load_scenario_str(case_study_text()).unwrap();
        assert_eq!(s.initial_position(0), 80.0);
        let last = s.batches.len() - 1;
        assert_eq!(
            s.initial_position(last),
            s.batches[last].initial_volume()
        );
    }
}
