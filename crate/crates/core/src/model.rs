//! Assembles the continuous-time MILP from a scenario: typed variables,
//! tagged linear constraints, and the cost objective.
//!
//! Index conventions: runs `k` and all set indices are 0-based. Batch
//! coordinates `F` and sizes `W` carry a time index `t` in `0..=K`, where
//! `t = 0` is the initial state and `t = k + 1` snapshots the end of run `k`.
//! Event intervals are 1-based (`e` in `1..|E|`), matching the timeline
//! accessor.

use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    /// Completion time of run k.
    C { k: usize },
    /// Length of run k.
    L { k: usize },
    /// Length of the sub-run of source s within run k.
    Ls { k: usize, s: usize },
    /// Volume injected into batch i from source s during run k.
    Q { i: usize, s: usize, k: usize },
    /// Product split of Q.
    Qp { i: usize, s: usize, p: usize, k: usize },
    /// Volume delivered from batch i to depot j during run k.
    D { i: usize, j: usize, k: usize },
    /// Product split of D.
    Dp { i: usize, j: usize, p: usize, k: usize },
    /// Upper coordinate of batch i at time index t.
    F { i: usize, t: usize },
    /// Volume of batch i at time index t.
    W { i: usize, t: usize },
    /// Backorder of product p at depot j.
    Bo { p: usize, j: usize },
    /// Interface reprocessing cost between batches i and i+1.
    Rc { i: usize },
    /// Pumping cost of run k.
    Pc { k: usize },
    /// Total backorder cost.
    Bc,
    /// Binary: batch i receives product from source s during run k.
    V { i: usize, s: usize, k: usize },
    /// Binary: batch i delivers to depot j during run k.
    X { i: usize, j: usize, k: usize },
    /// Binary: batch i carries product p.
    Y { i: usize, p: usize },
    /// Binary: run k executes inside event interval e.
    B { k: usize, e: usize },
}

impl VarRef {
    pub fn kind(&self) -> &'static str {
        match self {
            VarRef::C { .. } => "C",
            VarRef::L { .. } => "L",
            VarRef::Ls { .. } => "Ls",
            VarRef::Q { .. } => "Q",
            VarRef::Qp { .. } => "QP",
            VarRef::D { .. } => "D",
            VarRef::Dp { .. } => "DP",
            VarRef::F { .. } => "F",
            VarRef::W { .. } => "W",
            VarRef::Bo { .. } => "BO",
            VarRef::Rc { .. } => "RC",
            VarRef::Pc { .. } => "PC",
            VarRef::Bc => "BC",
            VarRef::V { .. } => "v",
            VarRef::X { .. } => "x",
            VarRef::Y { .. } => "y",
            VarRef::B { .. } => "b",
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarRef::C { k } => write!(f, "C_{k}"),
            VarRef::L { k } => write!(f, "L_{k}"),
            VarRef::Ls { k, s } => write!(f, "Ls_{k}_{s}"),
            VarRef::Q { i, s, k } => write!(f, "Q_{i}_{s}_{k}"),
            VarRef::Qp { i, s, p, k } => write!(f, "QP_{i}_{s}_{p}_{k}"),
            VarRef::D { i, j, k } => write!(f, "D_{i}_{j}_{k}"),
            VarRef::Dp { i, j, p, k } => write!(f, "DP_{i}_{j}_{p}_{k}"),
            VarRef::F { i, t } => write!(f, "F_{i}_{t}"),
            VarRef::W { i, t } => write!(f, "W_{i}_{t}"),
            VarRef::Bo { p, j } => write!(f, "BO_{p}_{j}"),
            VarRef::Rc { i } => write!(f, "RC_{i}"),
            VarRef::Pc { k } => write!(f, "PC_{k}"),
            VarRef::Bc => write!(f, "BC"),
            VarRef::V { i, s, k } => write!(f, "v_{i}_{s}_{k}"),
            VarRef::X { i, j, k } => write!(f, "x_{i}_{j}_{k}"),
            VarRef::Y { i, p } => write!(f, "y_{i}_{p}"),
            VarRef::B { k, e } => write!(f, "b_{k}_{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(VarRef, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: &'static str,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub vref: VarRef,
    pub lb: f64,
    pub ub: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BigM {
    pub m_time: f64,
    pub m_vol: f64,
    pub m_count: f64,
}

/// Big-M constants for a scenario: the time guard is the horizon itself, the
/// volume guard covers any coordinate plus one injection, and the count guard
/// bounds how many (run, source) injections one batch can accumulate.
pub fn big_m_values(s: &Scenario) -> BigM {
    BigM {
        m_time: s.horizon,
        m_vol: s.pipeline_volume + s.batch_size_max,
        m_count: (s.run_count * s.sources.len()) as f64,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Adds an epsilon * C_last term so the cheapest plan with the shortest
    /// makespan is selected among cost-equal optima.
    pub tie_break: bool,
    /// Emit aggregate supply-bound rows (eqSU) where the scenario bounds them.
    pub supply_bounds: bool,
    /// Scale factor on the volume big-M, used by robustness checks.
    pub big_m_vol_scale: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            tie_break: false,
            supply_bounds: true,
            big_m_vol_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    /// Minimized linear objective.
    pub objective: Vec<(VarRef, f64)>,
    pub big_m: BigM,
    pub dims: Dims,
    index: HashMap<VarRef, usize>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Dims {
    pub runs: usize,
    pub batches: usize,
    pub sources: usize,
    pub depots: usize,
    pub products: usize,
    pub intervals: usize,
}

impl ModelInstance {
    pub fn new(
        variables: Vec<Variable>,
        constraints: Vec<LinearConstraint>,
        objective: Vec<(VarRef, f64)>,
        big_m: BigM,
        dims: Dims,
    ) -> Self {
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.vref, i))
            .collect();
        ModelInstance {
            variables,
            constraints,
            objective,
            big_m,
            dims,
            index,
        }
    }

    pub fn var_index(&self, v: VarRef) -> usize {
        self.index[&v]
    }

    pub fn try_var_index(&self, v: VarRef) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Row activity of a constraint under an assignment.
    pub fn activity(&self, c: &LinearConstraint, values: &[f64]) -> f64 {
        c.terms
            .iter()
            .map(|(v, coef)| coef * values[self.index[v]])
            .sum()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|(v, coef)| coef * values[self.index[v]])
            .sum()
    }
}

struct Builder {
    vars: Vec<Variable>,
    index: HashMap<VarRef, usize>,
    constraints: Vec<LinearConstraint>,
}

impl Builder {
    fn add_var(&mut self, vref: VarRef, lb: f64, ub: f64, integer: bool) {
        let idx = self.vars.len();
        self.vars.push(Variable {
            vref,
            lb,
            ub,
            integer,
        });
        self.index.insert(vref, idx);
    }

    fn row(&mut self, tag: &'static str, terms: Vec<(VarRef, f64)>, sense: Sense, rhs: f64) {
        debug_assert!(terms.iter().all(|(v, _)| self.index.contains_key(v)));
        self.constraints.push(LinearConstraint {
            terms,
            sense,
            rhs,
            tag,
        });
    }
}

/// Builds the full MILP for a validated scenario.
pub fn build_model(s: &Scenario, opts: &BuildOptions) -> ModelInstance {
    let nk = s.run_count;
    let ni = s.batches.len();
    let ns = s.sources.len();
    let nj = s.depots.len();
    let np = s.products.len();
    let ne = s.intervals();
    let pv = s.pipeline_volume;
    let h = s.horizon;
    let q_min = s.batch_size_min;
    let q_max = s.batch_size_max;

    let mut m = big_m_values(s);
    m.m_vol *= opts.big_m_vol_scale;

    let mut b = Builder {
        vars: Vec::new(),
        index: HashMap::new(),
        constraints: Vec::new(),
    };

    // Initial tails: once a batch's rear passes a coordinate it never comes
    // back, so contact binaries for coordinates already behind the batch at
    // t = 0 can be fixed to zero.
    let init_tail: Vec<f64> = (0..ni).map(|i| s.initial_position(i) - s.batches[i].initial_volume()).collect();
    let pos_eps = 1e-9 * pv.max(1.0);

    // --- variables ---------------------------------------------------------
    for k in 0..nk {
        b.add_var(VarRef::C { k }, 0.0, h, false);
    }
    for k in 0..nk {
        b.add_var(VarRef::L { k }, 0.0, h, false);
    }
    for k in 0..nk {
        for s_ in 0..ns {
            b.add_var(VarRef::Ls { k, s: s_ }, 0.0, h, false);
        }
    }
    for i in 0..ni {
        for s_ in 0..ns {
            for k in 0..nk {
                b.add_var(VarRef::Q { i, s: s_, k }, 0.0, q_max, false);
            }
        }
    }
    for i in 0..ni {
        for s_ in 0..ns {
            for p in 0..np {
                for k in 0..nk {
                    b.add_var(VarRef::Qp { i, s: s_, p, k }, 0.0, q_max, false);
                }
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                b.add_var(VarRef::D { i, j, k }, 0.0, pv, false);
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for p in 0..np {
                for k in 0..nk {
                    b.add_var(VarRef::Dp { i, j, p, k }, 0.0, pv, false);
                }
            }
        }
    }
    for i in 0..ni {
        for t in 0..=nk {
            b.add_var(VarRef::F { i, t }, 0.0, pv, false);
        }
    }
    for i in 0..ni {
        for t in 0..=nk {
            b.add_var(VarRef::W { i, t }, 0.0, pv, false);
        }
    }
    for p in 0..np {
        for j in 0..nj {
            b.add_var(VarRef::Bo { p, j }, 0.0, s.depots[j].demand_min[p], false);
        }
    }
    let max_cif = s
        .interface_cost
        .iter()
        .flatten()
        .fold(0.0f64, |a, &c| a.max(c));
    for i in 0..ni.saturating_sub(1) {
        b.add_var(VarRef::Rc { i }, 0.0, max_cif, false);
    }
    for k in 0..nk {
        b.add_var(VarRef::Pc { k }, 0.0, f64::INFINITY, false);
    }
    b.add_var(VarRef::Bc, 0.0, f64::INFINITY, false);
    for i in 0..ni {
        for s_ in 0..ns {
            let reachable = init_tail[i] <= s.sources[s_].tau + pos_eps;
            for k in 0..nk {
                let ub = if reachable { 1.0 } else { 0.0 };
                b.add_var(VarRef::V { i, s: s_, k }, 0.0, ub, true);
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            let reachable = init_tail[i] <= s.depots[j].sigma + pos_eps;
            for k in 0..nk {
                let ub = if reachable { 1.0 } else { 0.0 };
                b.add_var(VarRef::X { i, j, k }, 0.0, ub, true);
            }
        }
    }
    for i in 0..ni {
        for p in 0..np {
            b.add_var(VarRef::Y { i, p }, 0.0, 1.0, true);
        }
    }
    for k in 0..nk {
        for e in 1..=ne {
            b.add_var(VarRef::B { k, e }, 0.0, 1.0, true);
        }
    }

    // --- constraints -------------------------------------------------------
    let t_of = |e: usize| s.events[e].time;

    // eq1: a run starts after its predecessor completes.
    for k in 1..nk {
        b.row(
            "eq1",
            vec![
                (VarRef::C { k }, 1.0),
                (VarRef::L { k }, -1.0),
                (VarRef::C { k: k - 1 }, -1.0),
            ],
            Sense::Ge,
            0.0,
        );
    }
    // eq2: all runs finish inside the horizon.
    for k in 0..nk {
        b.row("eq2", vec![(VarRef::C { k }, 1.0)], Sense::Le, h);
    }
    // eq3: each run is assigned exactly one event interval.
    for k in 0..nk {
        let terms = (1..=ne).map(|e| (VarRef::B { k, e }, 1.0)).collect();
        b.row("eq3", terms, Sense::Eq, 1.0);
    }
    // eq4/eq5: the assigned interval brackets the run.
    for k in 0..nk {
        for e in 1..=ne {
            b.row(
                "eq4",
                vec![
                    (VarRef::C { k }, 1.0),
                    (VarRef::L { k }, -1.0),
                    (VarRef::B { k, e }, -t_of(e - 1)),
                ],
                Sense::Ge,
                0.0,
            );
            b.row(
                "eq5",
                vec![
                    (VarRef::C { k }, 1.0),
                    (VarRef::B { k, e }, m.m_time - t_of(e)),
                ],
                Sense::Le,
                m.m_time,
            );
        }
    }
    // eq6: at most one batch per (run, source).
    for k in 0..nk {
        for s_ in 0..ns {
            let terms = (0..ni).map(|i| (VarRef::V { i, s: s_, k }, 1.0)).collect();
            b.row("eq6", terms, Sense::Le, 1.0);
        }
    }
    // eq7: once a run is dummy, all later runs are dummy.
    for k in 1..nk {
        let mut terms = Vec::with_capacity(2 * ni * ns);
        for s_ in 0..ns {
            for i in 0..ni {
                terms.push((VarRef::V { i, s: s_, k }, 1.0));
                terms.push((VarRef::V { i, s: s_, k: k - 1 }, -m.m_count));
            }
        }
        b.row("eq7", terms, Sense::Le, 0.0);
    }
    // eq8: injected volume and injection flag vanish together.
    for i in 0..ni {
        for s_ in 0..ns {
            for k in 0..nk {
                b.row(
                    "eq8",
                    vec![
                        (VarRef::V { i, s: s_, k }, q_min),
                        (VarRef::Q { i, s: s_, k }, -1.0),
                    ],
                    Sense::Le,
                    0.0,
                );
                b.row(
                    "eq8",
                    vec![
                        (VarRef::Q { i, s: s_, k }, 1.0),
                        (VarRef::V { i, s: s_, k }, -q_max),
                    ],
                    Sense::Le,
                    0.0,
                );
            }
        }
    }
    // eq9: a run lasts as long as its longest sub-run.
    for k in 0..nk {
        for s_ in 0..ns {
            b.row(
                "eq9",
                vec![(VarRef::L { k }, 1.0), (VarRef::Ls { k, s: s_ }, -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    // eq11: event-guarded flow-rate coupling. The guard deactivates the
    // interval's rate bounds for runs assigned elsewhere.
    for k in 0..nk {
        for s_ in 0..ns {
            for e in 1..=ne {
                let lo = s.sources[s_].rate_min.at(e).unwrap();
                let hi = s.sources[s_].rate_max.at(e).unwrap();
                let m_lo = lo * h;
                let mut terms = vec![
                    (VarRef::Ls { k, s: s_ }, lo),
                    (VarRef::B { k, e }, m_lo),
                ];
                for i in 0..ni {
                    terms.push((VarRef::Q { i, s: s_, k }, -1.0));
                }
                b.row("eq11", terms, Sense::Le, m_lo);

                let mut terms = vec![
                    (VarRef::Ls { k, s: s_ }, -hi),
                    (VarRef::B { k, e }, q_max),
                ];
                for i in 0..ni {
                    terms.push((VarRef::Q { i, s: s_, k }, 1.0));
                }
                b.row("eq11", terms, Sense::Le, q_max);
            }
        }
    }
    // eq12: batch volume balance across a run.
    for i in 0..ni {
        for k in 0..nk {
            let mut terms = vec![
                (VarRef::W { i, t: k + 1 }, 1.0),
                (VarRef::W { i, t: k }, -1.0),
            ];
            for s_ in 0..ns {
                terms.push((VarRef::Q { i, s: s_, k }, -1.0));
            }
            for j in 0..nj {
                terms.push((VarRef::D { i, j, k }, 1.0));
            }
            b.row("eq12", terms, Sense::Eq, 0.0);
        }
    }
    // eq13: deliveries are pushed by same-run injections upstream of the depot.
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                let mut terms = vec![(VarRef::D { i, j, k }, 1.0)];
                for s_ in 0..ns {
                    if s.sources[s_].tau < s.depots[j].sigma {
                        for i2 in 0..ni {
                            terms.push((VarRef::Q { i: i2, s: s_, k }, -1.0));
                        }
                    }
                }
                b.row("eq13", terms, Sense::Le, 0.0);
            }
        }
    }
    // eq14: adjacent batches tile the line (including the initial state, which
    // pins the positions of empty slots).
    for i in 0..ni - 1 {
        for t in 0..=nk {
            b.row(
                "eq14",
                vec![
                    (VarRef::F { i, t }, 1.0),
                    (VarRef::W { i, t }, -1.0),
                    (VarRef::F { i: i + 1, t }, -1.0),
                ],
                Sense::Eq,
                0.0,
            );
        }
    }
    // eq15: batches never move backward.
    for i in 0..ni {
        for k in 0..nk {
            b.row(
                "eq15",
                vec![
                    (VarRef::F { i, t: k + 1 }, 1.0),
                    (VarRef::F { i, t: k }, -1.0),
                ],
                Sense::Ge,
                0.0,
            );
        }
    }
    // eq16/eq17: batches stay inside the line.
    for i in 0..ni {
        for k in 0..nk {
            b.row("eq16", vec![(VarRef::F { i, t: k + 1 }, 1.0)], Sense::Le, pv);
            b.row(
                "eq17",
                vec![
                    (VarRef::F { i, t: k + 1 }, 1.0),
                    (VarRef::W { i, t: k + 1 }, -1.0),
                ],
                Sense::Ge,
                0.0,
            );
        }
    }
    // eq18: the line is always full.
    for k in 0..nk {
        let terms = (0..ni).map(|i| (VarRef::W { i, t: k + 1 }, 1.0)).collect();
        b.row("eq18", terms, Sense::Eq, pv);
    }
    // eq19: per-run input equals output.
    for k in 0..nk {
        let mut terms = Vec::new();
        for i in 0..ni {
            for s_ in 0..ns {
                terms.push((VarRef::Q { i, s: s_, k }, 1.0));
            }
            for j in 0..nj {
                terms.push((VarRef::D { i, j, k }, -1.0));
            }
        }
        b.row("eq19", terms, Sense::Eq, 0.0);
    }
    // eq20/eq21: a batch can only receive product while it spans the source.
    for i in 0..ni {
        for s_ in 0..ns {
            let tau = s.sources[s_].tau;
            for k in 0..nk {
                b.row(
                    "eq20",
                    vec![
                        (VarRef::F { i, t: k }, 1.0),
                        (VarRef::V { i, s: s_, k }, -tau),
                    ],
                    Sense::Ge,
                    0.0,
                );
                b.row(
                    "eq21",
                    vec![
                        (VarRef::F { i, t: k }, 1.0),
                        (VarRef::W { i, t: k }, -1.0),
                        (VarRef::V { i, s: s_, k }, m.m_vol),
                    ],
                    Sense::Le,
                    tau + m.m_vol,
                );
            }
        }
    }
    // eq22: event-indexed per-run delivery bounds, guarded like eq11 so only
    // the interval the run executes in is binding.
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                for e in 1..=ne {
                    let dmin = s.depots[j].delivery_min.at(e).unwrap();
                    let dmax = s.depots[j].delivery_max.at(e).unwrap();
                    b.row(
                        "eq22",
                        vec![
                            (VarRef::X { i, j, k }, dmin),
                            (VarRef::B { k, e }, m.m_vol),
                            (VarRef::D { i, j, k }, -1.0),
                        ],
                        Sense::Le,
                        m.m_vol,
                    );
                    b.row(
                        "eq22",
                        vec![
                            (VarRef::D { i, j, k }, 1.0),
                            (VarRef::X { i, j, k }, -dmax),
                            (VarRef::B { k, e }, m.m_vol),
                        ],
                        Sense::Le,
                        m.m_vol,
                    );
                }
            }
        }
    }
    // eq23/eq24: the batch must reach the depot and not have passed it.
    for i in 0..ni {
        for j in 0..nj {
            let sigma = s.depots[j].sigma;
            for k in 0..nk {
                b.row(
                    "eq23",
                    vec![
                        (VarRef::F { i, t: k + 1 }, 1.0),
                        (VarRef::X { i, j, k }, -sigma),
                    ],
                    Sense::Ge,
                    0.0,
                );
                b.row(
                    "eq24",
                    vec![
                        (VarRef::F { i, t: k }, 1.0),
                        (VarRef::W { i, t: k }, -1.0),
                        (VarRef::X { i, j, k }, m.m_vol),
                    ],
                    Sense::Le,
                    sigma + m.m_vol,
                );
            }
        }
    }
    // eq26: cumulative deliveries up to depot j cannot exceed the volume of
    // the batch initially ahead of j plus same-run upstream injections.
    for i in 0..ni {
        for j in 0..nj {
            let sigma = s.depots[j].sigma;
            for k in 0..nk {
                let mut terms = Vec::new();
                for j2 in 0..=j {
                    terms.push((VarRef::D { i, j: j2, k }, 1.0));
                }
                terms.push((VarRef::F { i, t: k }, 1.0));
                terms.push((VarRef::W { i, t: k }, -1.0));
                for s_ in 0..ns {
                    if s.sources[s_].tau < sigma {
                        terms.push((VarRef::Q { i, s: s_, k }, -1.0));
                    }
                }
                terms.push((VarRef::X { i, j, k }, pv - sigma));
                b.row("eq26", terms, Sense::Le, pv);
            }
        }
    }
    // eq27: one product per batch.
    for i in 0..ni {
        let terms = (0..np).map(|p| (VarRef::Y { i, p }, 1.0)).collect();
        b.row("eq27", terms, Sense::Le, 1.0);
    }
    // eq28: real new batches are injected at least once; fictitious never.
    for (i, slot) in s.batches.iter().enumerate() {
        if !slot.is_new() {
            continue;
        }
        let mut terms: Vec<(VarRef, f64)> = (0..np).map(|p| (VarRef::Y { i, p }, 1.0)).collect();
        for s_ in 0..ns {
            for k in 0..nk {
                terms.push((VarRef::V { i, s: s_, k }, -1.0));
            }
        }
        b.row("eq28", terms, Sense::Le, 0.0);

        let mut terms: Vec<(VarRef, f64)> = Vec::new();
        for s_ in 0..ns {
            for k in 0..nk {
                terms.push((VarRef::V { i, s: s_, k }, 1.0));
            }
        }
        for p in 0..np {
            terms.push((VarRef::Y { i, p }, -m.m_count));
        }
        b.row("eq28", terms, Sense::Le, 0.0);
    }
    // eq29: forbidden product sequences between a new batch and its
    // predecessor in the line order.
    for (i, slot) in s.batches.iter().enumerate() {
        if i == 0 || !slot.is_new() {
            continue;
        }
        for &(p, p2) in &s.forbidden_pairs {
            b.row(
                "eq29",
                vec![(VarRef::Y { i: i - 1, p }, 1.0), (VarRef::Y { i, p: p2 }, 1.0)],
                Sense::Le,
                1.0,
            );
        }
    }
    // eq30/eq31: injected product splits agree with the batch product.
    for i in 0..ni {
        for s_ in 0..ns {
            for p in 0..np {
                for k in 0..nk {
                    b.row(
                        "eq30",
                        vec![
                            (VarRef::Qp { i, s: s_, p, k }, 1.0),
                            (VarRef::Y { i, p }, -q_max),
                        ],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }
    for i in 0..ni {
        for s_ in 0..ns {
            for k in 0..nk {
                let mut terms: Vec<(VarRef, f64)> =
                    (0..np).map(|p| (VarRef::Qp { i, s: s_, p, k }, 1.0)).collect();
                terms.push((VarRef::Q { i, s: s_, k }, -1.0));
                b.row("eq31", terms, Sense::Eq, 0.0);
            }
        }
    }
    // eq32/eq33: delivered product splits agree with the batch product.
    for i in 0..ni {
        for j in 0..nj {
            let dmax_j = s.depots[j]
                .delivery_max
                .values()
                .iter()
                .fold(0.0f64, |a, &v| a.max(v));
            for p in 0..np {
                for k in 0..nk {
                    b.row(
                        "eq32",
                        vec![
                            (VarRef::Dp { i, j, p, k }, 1.0),
                            (VarRef::Y { i, p }, -dmax_j),
                        ],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                let mut terms: Vec<(VarRef, f64)> =
                    (0..np).map(|p| (VarRef::Dp { i, j, p, k }, 1.0)).collect();
                terms.push((VarRef::D { i, j, k }, -1.0));
                b.row("eq33", terms, Sense::Eq, 0.0);
            }
        }
    }
    // eq34: aggregate demand window with backorder slack.
    for p in 0..np {
        for j in 0..nj {
            let mut terms: Vec<(VarRef, f64)> = Vec::new();
            for k in 0..nk {
                for i in 0..ni {
                    terms.push((VarRef::Dp { i, j, p, k }, 1.0));
                }
            }
            terms.push((VarRef::Bo { p, j }, 1.0));
            b.row("eq34", terms, Sense::Ge, s.depots[j].demand_min[p]);

            let terms: Vec<(VarRef, f64)> = (0..nk)
                .flat_map(|k| (0..ni).map(move |i| (VarRef::Dp { i, j, p, k }, 1.0)))
                .collect();
            b.row("eq34", terms, Sense::Le, s.depots[j].demand_max[p]);
        }
    }
    // eq35: initial coordinates and sizes. The coordinate formula extends to
    // new slots, pinning each empty slot to its insertion point.
    for i in 0..ni {
        b.row(
            "eq35",
            vec![(VarRef::F { i, t: 0 }, 1.0)],
            Sense::Eq,
            s.initial_position(i),
        );
        b.row(
            "eq35",
            vec![(VarRef::W { i, t: 0 }, 1.0)],
            Sense::Eq,
            s.batches[i].initial_volume(),
        );
    }
    // eq36: old batches carry their known product.
    for (i, slot) in s.batches.iter().enumerate() {
        if let Some(p) = slot.old_product() {
            b.row("eq36", vec![(VarRef::Y { i, p }, 1.0)], Sense::Eq, 1.0);
        }
    }
    // obj38: interface-cost epigraph over adjacent batch pairs.
    for i in 0..ni - 1 {
        for p in 0..np {
            for p2 in 0..np {
                let cif = s.interface_cost[p][p2];
                if cif > 0.0 {
                    b.row(
                        "obj38",
                        vec![
                            (VarRef::Rc { i }, 1.0),
                            (VarRef::Y { i, p }, -cif),
                            (VarRef::Y { i: i + 1, p: p2 }, -cif),
                        ],
                        Sense::Ge,
                        -cif,
                    );
                }
            }
        }
    }
    // obj39: pumping cost definition.
    for k in 0..nk {
        let mut terms = vec![(VarRef::Pc { k }, 1.0)];
        for i in 0..ni {
            for s_ in 0..ns {
                for p in 0..np {
                    let cin = s.sources[s_].pump_cost[p];
                    if cin != 0.0 {
                        terms.push((VarRef::Qp { i, s: s_, p, k }, -cin));
                    }
                }
            }
        }
        b.row("obj39", terms, Sense::Eq, 0.0);
    }
    // obj40: backorder cost definition.
    {
        let mut terms = vec![(VarRef::Bc, 1.0)];
        for p in 0..np {
            for j in 0..nj {
                let cb = s.depots[j].backorder_cost[p];
                if cb != 0.0 {
                    terms.push((VarRef::Bo { p, j }, -cb));
                }
            }
        }
        b.row("obj40", terms, Sense::Eq, 0.0);
    }
    // eqSU: aggregate supply bounds where the scenario states them.
    if opts.supply_bounds {
        for s_ in 0..ns {
            for p in 0..np {
                let mk_terms = || -> Vec<(VarRef, f64)> {
                    (0..ni)
                        .flat_map(|i| (0..nk).map(move |k| (VarRef::Qp { i, s: s_, p, k }, 1.0)))
                        .collect()
                };
                if let Some(su) = s.sources[s_].supply_max[p] {
                    b.row("eqSU", mk_terms(), Sense::Le, su);
                }
                if let Some(sl) = s.sources[s_].supply_min[p] {
                    b.row("eqSU", mk_terms(), Sense::Ge, sl);
                }
            }
        }
    }

    // --- objective ----------------------------------------------------------
    let mut objective: Vec<(VarRef, f64)> = Vec::new();
    for i in 0..ni.saturating_sub(1) {
        objective.push((VarRef::Rc { i }, 1.0));
    }
    for k in 0..nk {
        objective.push((VarRef::Pc { k }, 1.0));
    }
    objective.push((VarRef::Bc, 1.0));
    if opts.tie_break {
        objective.push((VarRef::C { k: nk - 1 }, tie_break_epsilon(s)));
    }

    ModelInstance {
        variables: b.vars,
        constraints: b.constraints,
        objective,
        big_m: m,
        dims: Dims {
            runs: nk,
            batches: ni,
            sources: ns,
            depots: nj,
            products: np,
            intervals: ne,
        },
        index: b.index,
    }
}

/// Small enough that the makespan term can never change the cost-optimal set:
/// 1e-4 times the smallest positive cost coefficient.
pub fn tie_break_epsilon(s: &Scenario) -> f64 {
    let mut min_cost = f64::INFINITY;
    for row in &s.interface_cost {
        for &c in row {
            if c > 0.0 {
                min_cost = min_cost.min(c);
            }
        }
    }
    for src in &s.sources {
        for &c in &src.pump_cost {
            if c > 0.0 {
                min_cost = min_cost.min(c);
            }
        }
    }
    for d in &s.depots {
        for &c in &d.backorder_cost {
            if c > 0.0 {
                min_cost = min_cost.min(c);
            }
        }
    }
    if min_cost.is_finite() {
        1e-4 * min_cost
    } else {
        1e-4
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelStats {
    pub constraints_by_tag: std::collections::BTreeMap<String, usize>,
    pub variables_by_kind: std::collections::BTreeMap<String, usize>,
    pub num_variables: usize,
    pub num_binaries: usize,
    pub num_constraints: usize,
}

pub fn model_stats(m: &ModelInstance) -> ModelStats {
    let mut constraints_by_tag = std::collections::BTreeMap::new();
    for c in &m.constraints {
        *constraints_by_tag.entry(c.tag.to_string()).or_insert(0) += 1;
    }
    let mut variables_by_kind = std::collections::BTreeMap::new();
    for v in &m.variables {
        *variables_by_kind
            .entry(v.vref.kind().to_string())
            .or_insert(0) += 1;
    }
    ModelStats {
        num_variables: m.variables.len(),
        num_binaries: m.variables.iter().filter(|v| v.integer).count(),
        num_constraints: m.constraints.len(),
        constraints_by_tag,
        variables_by_kind,
    }
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} variables ({} binary), {} constraints",
            self.num_variables, self.num_binaries, self.num_constraints
        )?;
        for (tag, n) in &self.constraints_by_tag {
            writeln!(f, "  {tag:>6}: {n}")?;
        }
        Ok(())
    }
}

/// Renders one constraint in readable algebraic form.
pub fn render_constraint(c: &LinearConstraint) -> String {
    let mut lhs = String::new();
    for (v, coef) in &c.terms {
        if *coef == 0.0 {
            continue;
        }
        if lhs.is_empty() {
            if *coef == 1.0 {
                lhs.push_str(&v.to_string());
            } else if *coef == -1.0 {
                lhs.push_str(&format!("-{v}"));
            } else {
                lhs.push_str(&format!("{coef} {v}"));
            }
        } else if *coef == 1.0 {
            lhs.push_str(&format!(" + {v}"));
        } else if *coef == -1.0 {
            lhs.push_str(&format!(" - {v}"));
        } else if *coef < 0.0 {
            lhs.push_str(&format!(" - {} {v}", -coef));
        } else {
            lhs.push_str(&format!(" + {coef} {v}"));
        }
    }
    format!("[{}] {} {} {}", c.tag, lhs, c.sense, c.rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{load_scenario_str, validate};

    fn case_study() -> Scenario {
        load_scenario_str(include_str!("../data/case_study.json")).unwrap()
    }

    fn maintenance() -> Scenario {
        load_scenario_str(include_str!("../data/case_study_maintenance.json")).unwrap()
    }

    #[test]
    fn big_m_formulas() {
        let s = case_study();
        let m = big_m_values(&s);
        assert_eq!(m.m_time, 250.0);
        assert_eq!(m.m_vol, 160.0); // PV=80, Q_max=80
        assert_eq!(m.m_count, 18.0); // |K|=9, |S|=2
    }

    #[test]
    fn every_family_appears() {
        let s = maintenance();
        assert!(validate(&s).is_empty());
        let m = build_model(&s, &BuildOptions::default());
        let stats = model_stats(&m);
        for tag in [
            "eq1", "eq2", "eq3", "eq4", "eq5", "eq6", "eq7", "eq8", "eq9", "eq11", "eq12",
            "eq13", "eq14", "eq15", "eq16", "eq17", "eq18", "eq19", "eq20", "eq21", "eq22",
            "eq23", "eq24", "eq26", "eq27", "eq28", "eq30", "eq31", "eq32", "eq33", "eq34",
            "eq35", "eq36", "obj38", "obj39", "obj40", "eqSU",
        ] {
            assert!(
                stats.constraints_by_tag.contains_key(tag),
                "missing family {tag}"
            );
        }
    }

    #[test]
    fn stats_match_index_ranges() {
        let s = case_study();
        let m = build_model(&s, &BuildOptions::default());
        let stats = model_stats(&m);
        let (k, i, s_, j, e) = (9usize, 10usize, 2usize, 3usize, 1usize);
        assert_eq!(stats.constraints_by_tag["eq18"], k);
        assert_eq!(stats.constraints_by_tag["eq11"], 2 * k * s_ * e);
        assert_eq!(stats.constraints_by_tag["eq13"], i * j * k);
        assert_eq!(stats.constraints_by_tag["eq6"], k * s_);
    }

    #[test]
    fn single_interval_degeneracy() {
        let s = case_study();
        let m = build_model(&s, &BuildOptions::default());
        // One alignment binary per run; eq3 then forces each to 1.
        let stats = model_stats(&m);
        assert_eq!(stats.variables_by_kind["b"], s.run_count);
        assert_eq!(stats.constraints_by_tag["eq3"], s.run_count);
        for c in m.constraints.iter().filter(|c| c.tag == "eq3") {
            assert_eq!(c.terms.len(), 1);
            assert_eq!(c.sense, Sense::Eq);
            assert_eq!(c.rhs, 1.0);
        }
    }

    #[test]
    fn forbidden_pair_instantiation() {
        let mut s = case_study();
        let c = s.product_index("C").unwrap();
        let a = s.product_index("A").unwrap();
        s.forbidden_pairs.push((c, a));
        let m = build_model(&s, &BuildOptions::default());
        let new_positions_after_first = s
            .batches
            .iter()
            .enumerate()
            .filter(|(i, b)| *i > 0 && b.is_new())
            .count();
        let stats = model_stats(&m);
        assert_eq!(stats.constraints_by_tag["eq29"], new_positions_after_first);
        let row = m.constraints.iter().find(|c| c.tag == "eq29").unwrap();
        assert_eq!(row.sense, Sense::Le);
        assert_eq!(row.rhs, 1.0);
        assert_eq!(row.terms.len(), 2);
    }

    #[test]
    fn objective_references_declared_variables_only() {
        let s = maintenance();
        let m = build_model(&s, &BuildOptions { tie_break: true, ..Default::default() });
        for (v, _) in &m.objective {
            assert!(m.try_var_index(*v).is_some(), "undeclared {v}");
        }
        for c in &m.constraints {
            for (v, _) in &c.terms {
                assert!(m.try_var_index(*v).is_some(), "undeclared {v} in {}", c.tag);
            }
        }
    }

    #[test]
    fn unreachable_contacts_are_fixed() {
        let s = case_study();
        let m = build_model(&s, &BuildOptions::default());
        // Far-end batch B1 has initial tail 60: it can never again touch the
        // sources at 0 and 40, nor depot D1 at 20.
        let b1 = s.batch_index("B1").unwrap();
        for s_ in 0..s.sources.len() {
            for k in 0..s.run_count {
                let v = &m.variables[m.var_index(VarRef::V { i: b1, s: s_, k })];
                assert_eq!(v.ub, 0.0);
            }
        }
        let d1 = s.depot_index("D1").unwrap();
        let v = &m.variables[m.var_index(VarRef::X { i: b1, j: d1, k: 0 })];
        assert_eq!(v.ub, 0.0);
        // But it can still deliver to D3 at 80.
        let d3 = s.depot_index("D3").unwrap();
        let v = &m.variables[m.var_index(VarRef::X { i: b1, j: d3, k: 0 })];
        assert_eq!(v.ub, 1.0);
    }
}
