fn main() {
    // Placeholder while the engine modules land; replaced by the real CLI.
    let s = pipesched::scenario::load_scenario(std::path::Path::new(
        &std::env::args().nth(1).expect("scenario path"),
    ))
    .unwrap();
    let tie = std::env::args().any(|a| a == "--tie-break");
    let m = pipesched::model::build_model(
        &s,
        &pipesched::model::BuildOptions {
            tie_break: tie,
            ..Default::default()
        },
    );
    eprintln!("{}", pipesched::model::model_stats(&m));
    let start = std::time::Instant::now();
    let sol = pipesched::solver::solve(
        &m,
        &pipesched::solver::SolverConfig {
            time_limit: 480.0,
            ..Default::default()
        },
    )
    .unwrap();
    println!(
        "status {:?} objective {:.6} in {:.1}s",
        sol.status,
        sol.objective,
        start.elapsed().as_secs_f64()
    );
    use pipesched::model::VarRef;
    let nk = s.run_count;
    for k in 0..nk {
        let c = sol.get(&m, VarRef::C { k });
        let l = sol.get(&m, VarRef::L { k });
        let mut used = 0.0;
        for i in 0..s.batches.len() {
            for s_ in 0..s.sources.len() {
                used += sol.get(&m, VarRef::V { i, s: s_, k });
            }
        }
        println!("run {k}: [{:.2}, {:.2}] len {:.2} injections {used}", c - l, c, l);
        for i in 0..s.batches.len() {
            for s_ in 0..s.sources.len() {
                let q = sol.get(&m, VarRef::Q { i, s: s_, k });
                if q > 1e-6 {
                    let mut prod = String::new();
                    for p in 0..s.products.len() {
                        if sol.get(&m, VarRef::Qp { i, s: s_, p, k }) > 1e-6 {
                            prod = s.products[p].id.clone();
                        }
                    }
                    println!("   inj {} -> {} : {:.2} {}", s.sources[s_].id, s.batches[i].id(), q, prod);
                }
            }
            for j in 0..s.depots.len() {
                let d = sol.get(&m, VarRef::D { i, j, k });
                if d > 1e-6 {
                    println!("   del {} -> {} : {:.2}", s.batches[i].id(), s.depots[j].id, d);
                }
            }
        }
    }
    let mut rc = 0.0;
    for i in 0..s.batches.len() - 1 {
        rc += sol.get(&m, VarRef::Rc { i });
    }
    let mut pc = 0.0;
    for k in 0..nk {
        pc += sol.get(&m, VarRef::Pc { k });
    }
    println!("RC {rc:.2} PC {pc:.2} BC {:.2}", sol.get(&m, VarRef::Bc));
    let makespan = (0..nk)
        .map(|k| {
            let mut used = 0.0;
            for i in 0..s.batches.len() {
                for s_ in 0..s.sources.len() {
                    used += sol.get(&m, VarRef::V { i, s: s_, k });
                }
            }
            (k, used)
        })
        .filter(|(_, u)| *u > 0.5)
        .map(|(k, _)| sol.get(&m, VarRef::C { k }))
        .fold(0.0f64, f64::max);
    println!("real-run makespan {makespan:.4}");
}
