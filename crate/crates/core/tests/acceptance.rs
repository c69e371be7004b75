//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;

use parity_mu::bekic::{gaussian_eliminate, pairing_backward, pairing_forward};
use parity_mu::bridge::game_to_term;
use parity_mu::game::{parse_pg, print_pg, zielonka_solve, ParityGame};
use parity_mu::generate::{
    random_fixpoint, random_function, random_game, random_system, random_term, GameParams,
    TermParams,
};
use parity_mu::oracle::{
    enumerate_full_strategies, stabilized_count, OracleError, Stabilization, COUNT_LIMIT,
};
use parity_mu::semantics::{
    comparison_maps, eval, eval_on_morphism, eval_system, fold, sized_env, unfold, unroll, Env,
    EvalError, EvalOptions, FiniteFunction, SetValue, SystemValue, DEFAULT_BUDGET,
};
use parity_mu::term::{alpha_eq, parse, print, to_file, FixKind, MuTerm};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || {
        format!("took {:.1?}, over the {:?} limit", start.elapsed(), limit)
    })
}

fn eval_game(g: &ParityGame) -> Result<SetValue, String> {
    let t = game_to_term(g).map_err(|e| format!("translation failed: {e}"))?;
    eval(&t, &Env::new(), DEFAULT_BUDGET).map_err(|e| format!("evaluation of {t} failed: {e}"))
}

fn solver_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1);
    let params = GameParams {
        max_vertices: 6,
        max_priority: 4,
        ..GameParams::default()
    };
    for k in 0..1000 {
        let g = random_game(&mut rng, &params);
        let r = zielonka_solve(&g, &BTreeMap::new()).map_err(|e| format!("game {k}: {e}"))?;
        let (eva, adam) = common::brute_force_regions(&g);
        ensure(r.eva_region == eva && r.adam_region == adam, || {
            format!(
                "game {k} regions differ from brute force:\n{}",
                print_pg(&g)
            )
        })?;
        ensure(common::strategies_win(&g, &r), || {
            format!("game {k}: a solver strategy loses\n{}", print_pg(&g))
        })?;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "1000 games agree with brute force in {:.1?}",
        start.elapsed()
    ))
}

fn emptiness() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(2);
    let params = GameParams {
        max_vertices: 8,
        ..GameParams::default()
    };
    let mut wins = 0;
    for k in 0..500 {
        let g = random_game(&mut rng, &params);
        let r = zielonka_solve(&g, &BTreeMap::new()).map_err(|e| format!("game {k}: {e}"))?;
        let eva_wins = r.eva_region.contains(&g.initial().expect("initial"));
        let v = eval_game(&g).map_err(|e| format!("game {k}: {e}"))?;
        ensure(!v.is_empty() == eva_wins, || {
            format!(
                "game {k}: winner Eva = {eva_wins} but value {:?}\n{}",
                v.cardinality(),
                print_pg(&g)
            )
        })?;
        wins += eva_wins as usize;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "500 games ({wins} won by Eva) in {:.1?}",
        start.elapsed()
    ))
}

fn counting() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(3);
    let acyclic = GameParams {
        max_vertices: 8,
        acyclic: true,
        ..GameParams::default()
    };
    let mut resampled = 0;
    let mut done = 0;
    let mut nonzero = 0;
    while done < 200 {
        let g = random_game(&mut rng, &acyclic);
        let n = match enumerate_full_strategies(&g, COUNT_LIMIT as usize) {
            Ok(s) => s.len(),
            Err(OracleError::TooLarge { .. }) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(format!("acyclic game {done}: {e}")),
        };
        let v = eval_game(&g).map_err(|e| format!("acyclic game {done}: {e}"))?;
        ensure(v.cardinality() == Some(n), || {
            format!(
                "acyclic game {done}: {n} strategies but value {:?}\n{}",
                v.cardinality(),
                print_pg(&g)
            )
        })?;
        nonzero += (n > 0) as usize;
        done += 1;
    }

    let cyclic = GameParams {
        max_vertices: 8,
        ..GameParams::default()
    };
    let (mut stabilized, mut growing, mut other, mut stable_nonzero) = (0, 0, 0, 0);
    let mut attempts = 0;
    while stabilized < 200 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!(
                "only {stabilized} stabilizing games in {attempts} attempts"
            ));
        }
        let g = random_game(&mut rng, &cyclic);
        if parity_mu::oracle::is_acyclic(&g) {
            continue;
        }
        let s = match stabilized_count(&g, 12) {
            Ok(s) => s,
            Err(OracleError::TooLarge { .. }) => {
                resampled += 1;
                continue;
            }
            Err(e) => return Err(format!("cyclic game: {e}")),
        };
        let v = eval_game(&g)?;
        match s {
            Stabilization::Finite(n) => {
                ensure(v.cardinality() == Some(n as usize), || {
                    format!(
                        "stabilized count {n} but value {:?}\n{}",
                        v.cardinality(),
                        print_pg(&g)
                    )
                })?;
                stabilized += 1;
                stable_nonzero += (n > 0) as usize;
            }
            Stabilization::NotStabilized(tail) => {
                let counts =
                    parity_mu::oracle::count_sequence(&g, 12).map_err(|e| e.to_string())?;
                if counts.windows(2).all(|w| w[0] < w[1]) {
                    ensure(v.is_infinite(), || {
                        format!(
                            "counts {tail:?} grow but value {:?}\n{}",
                            v.cardinality(),
                            print_pg(&g)
                        )
                    })?;
                    growing += 1;
                } else {
                    other += 1;
                }
            }
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "200 acyclic ({nonzero} nonzero), 200 stabilized ({stable_nonzero} nonzero), {growing} growing, \
         {other} other, {resampled} resampled over the count limit, in {:.1?}",
        start.elapsed()
    ))
}

fn random_params<R: Rng>(rng: &mut R) -> (Vec<String>, Env) {
    let names: Vec<String> = ["A", "B"][..rng.gen_range(0..=2)]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let env = sized_env(names.iter().map(|n| (n.as_str(), rng.gen_range(0..=3))));
    (names, env)
}

fn bekic_preservation() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(4);
    let opts = EvalOptions::default();
    let infinite_opts = EvalOptions {
        max_elements: 20_000,
        ..opts
    };
    let mut summary = Vec::new();
    for kind in [FixKind::Mu, FixKind::Nu] {
        let (mut stable, mut diverged, mut maps, mut resampled) = (0, 0, 0, 0);
        for k in 0..300 {
            let (sys, env, solved, nested) = loop {
                let (names, env) = random_params(&mut rng);
                let m = rng.gen_range(2..=3);
                let sys = random_system(&mut rng, kind, m, &names);
                let solved = gaussian_eliminate(&sys).map_err(|e| e.to_string())?;
                let nested: Result<Vec<SetValue>, EvalError> = sys
                    .equations()
                    .iter()
                    .map(|eq| eval(solved.get(&eq.var).expect("solved"), &env, DEFAULT_BUDGET))
                    .collect();
                match nested {
                    Ok(nested) => break (sys, env, solved, nested),
                    // Finite but too large to enumerate.
                    Err(EvalError::ResourceLimit(_)) => resampled += 1,
                    Err(e) => return Err(format!("{kind:?} system {k}: {e}\n{}", sys.to_text())),
                }
            };
            // Infinite nested values only need the iteration to keep growing;
            // a stabilization would still be caught below.
            let sys_opts = if nested.iter().any(SetValue::is_infinite) {
                infinite_opts
            } else {
                opts
            };
            match eval_system(&sys, &env, &sys_opts)
                .map_err(|e| format!("{kind:?} system {k}: {e}"))?
            {
                SystemValue::Stabilized { components, .. } => {
                    for (i, c) in components.iter().enumerate() {
                        ensure(nested[i].cardinality() == Some(c.len()), || {
                            format!(
                                "{kind:?} system {k}, {}: simultaneous {} vs nested {:?}\n{}",
                                sys.equations()[i].var,
                                c.len(),
                                nested[i].cardinality(),
                                sys.to_text()
                            )
                        })?;
                    }
                    let fs = comparison_maps(&sys, &env, &opts, &components, &solved)
                        .map_err(|e| format!("{kind:?} system {k}: {e}\n{}", sys.to_text()))?;
                    ensure(fs.iter().all(FiniteFunction::is_bijection), || {
                        format!("{kind:?} system {k}: a comparison map is not a bijection")
                    })?;
                    maps += fs.len();
                    stable += 1;
                }
                SystemValue::Diverged { history, .. } => {
                    ensure(nested.iter().any(SetValue::is_infinite), || {
                        format!(
                            "{kind:?} system {k} diverged ({history:?}) but all nested values are finite\n{}",
                            sys.to_text()
                        )
                    })?;
                    diverged += 1;
                }
            }
        }
        summary.push(format!(
            "{}: {stable} stabilized with {maps} bijective maps, {diverged} infinite, {resampled} resampled over the element limit",
            kind.keyword()
        ));
    }
    Ok(format!("{} in {:.1?}", summary.join("; "), start.elapsed()))
}

fn pairing() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(5);
    let mut compared = 0;
    for k in 0..100 {
        let (mut names, env) = random_params(&mut rng);
        names.push("Y".into());
        let tp = TermParams {
            max_depth: 3,
            params: names.clone(),
            ..TermParams::default()
        };
        let f = random_term(&mut rng, &tp);
        names.push("X".into());
        let g = random_term(
            &mut rng,
            &TermParams {
                params: names.clone(),
                ..tp.clone()
            },
        );
        let nested = pairing_forward("X", "Y", &f, &g).map_err(|e| format!("pair {k}: {e}"))?;
        let back =
            pairing_backward("X", "Y", &f, &g, &nested).map_err(|e| format!("pair {k}: {e}"))?;
        let direct = MuTerm::mu("Y", parity_mu::term::substitute(&g, "X", &f));
        ensure(alpha_eq(&back, &direct), || {
            format!("pair {k}: {back} is not {direct}")
        })?;
        let y = eval(nested.get("Y").expect("Y"), &env, DEFAULT_BUDGET)
            .map_err(|e| format!("pair {k}: {e}"))?;
        let d = eval(&direct, &env, DEFAULT_BUDGET).map_err(|e| format!("pair {k}: {e}"))?;
        match (&y, &d) {
            (SetValue::Finite { elements: a, .. }, SetValue::Finite { elements: b, .. }) => {
                ensure(a == b, || {
                    format!("pair {k}: Y-component differs from the direct term")
                })?;
                compared += 1;
            }
            (SetValue::Infinite { .. }, SetValue::Infinite { .. }) => {}
            _ => return Err(format!("pair {k}: finiteness differs")),
        }
    }
    Ok(format!(
        "100 pairs ({compared} finite, compared elementwise) in {:.1?}",
        start.elapsed()
    ))
}

fn lambek() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(6);
    let (mut done, mut attempts, mut empty) = (0, 0, 0);
    while done < 300 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!("only {done} finite terms in {attempts} attempts"));
        }
        let (names, env) = random_params(&mut rng);
        let kind = if done % 2 == 0 {
            FixKind::Mu
        } else {
            FixKind::Nu
        };
        let t = random_fixpoint(
            &mut rng,
            kind,
            &TermParams {
                max_depth: 4,
                params: names,
                ..TermParams::default()
            },
        );
        let v = eval(&t, &env, DEFAULT_BUDGET).map_err(|e| format!("{t}: {e}"))?;
        let Some(n) = v.cardinality() else { continue };
        let u = eval(&unroll(&t).expect("fixed point"), &env, DEFAULT_BUDGET)
            .map_err(|e| format!("{t}: {e}"))?;
        ensure(u.cardinality() == Some(n), || {
            format!("{t}: {n} vs unrolled {:?}", u.cardinality())
        })?;
        let f = fold(&t, &env, DEFAULT_BUDGET).map_err(|e| format!("{t}: {e}"))?;
        let g = unfold(&t, &env, DEFAULT_BUDGET).map_err(|e| format!("{t}: {e}"))?;
        let gf = f.then(&g).map_err(|e| e.to_string())?;
        let fg = g.then(&f).map_err(|e| e.to_string())?;
        ensure(
            f.is_bijection() && g.is_bijection() && gf.is_identity() && fg.is_identity(),
            || format!("{t}: fold and unfold are not inverse bijections"),
        )?;
        empty += (n == 0) as usize;
        done += 1;
    }
    Ok(format!(
        "300 terms ({empty} empty) in {:.1?}",
        start.elapsed()
    ))
}

fn functor_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(7);
    let (mut done, mut attempts) = (0, 0);
    while done < 200 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!(
                "only {done} finite instances in {attempts} attempts"
            ));
        }
        let vars: Vec<String> = ["Y", "Z"][..rng.gen_range(1..=2)]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let t = random_term(
            &mut rng,
            &TermParams {
                max_depth: 4,
                params: vars.clone(),
                ..TermParams::default()
            },
        );
        let mut fs = BTreeMap::new();
        let mut gs = BTreeMap::new();
        for x in &vars {
            let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=3)).collect();
            let a = if rng.gen_bool(0.2) { 0 } else { sizes[0] };
            fs.insert(
                x.clone(),
                random_function(&mut rng, &format!("{x}a"), a, &format!("{x}b"), sizes[1]),
            );
            gs.insert(
                x.clone(),
                random_function(
                    &mut rng,
                    &format!("{x}b"),
                    sizes[1],
                    &format!("{x}c"),
                    sizes[2],
                ),
            );
        }
        let tf = match eval_on_morphism(&t, &fs, DEFAULT_BUDGET) {
            Ok(f) => f,
            Err(parity_mu::semantics::EvalError::Unsupported(_)) => continue,
            Err(e) => return Err(format!("{t}: {e}")),
        };
        let tg = match eval_on_morphism(&t, &gs, DEFAULT_BUDGET) {
            Ok(f) => f,
            Err(parity_mu::semantics::EvalError::Unsupported(_)) => continue,
            Err(e) => return Err(format!("{t}: {e}")),
        };
        let gf: BTreeMap<String, FiniteFunction> = vars
            .iter()
            .map(|x| (x.clone(), fs[x].then(&gs[x]).expect("composable")))
            .collect();
        let tgf = eval_on_morphism(&t, &gf, DEFAULT_BUDGET).map_err(|e| format!("{t}: {e}"))?;
        ensure(tgf == tf.then(&tg).map_err(|e| e.to_string())?, || {
            format!("{t}: composition is not preserved")
        })?;
        let ids: BTreeMap<String, FiniteFunction> = fs
            .iter()
            .map(|(x, f)| (x.clone(), FiniteFunction::identity(f.domain())))
            .collect();
        let tid = eval_on_morphism(&t, &ids, DEFAULT_BUDGET).map_err(|e| format!("{t}: {e}"))?;
        ensure(tid.is_identity(), || {
            format!("{t}: identity is not preserved")
        })?;
        done += 1;
    }
    Ok(format!("200 instances in {:.1?}", start.elapsed()))
}

fn closed_forms() -> Outcome {
    let cases = [
        ("(mu X (var X))", Some(0)),
        ("(nu X (var X))", Some(1)),
        ("(mu X (sum (prod) (var X)))", None),
        ("(nu X (prod (var X) (var X)))", Some(1)),
        (
            "(prod (sum (prod) (prod)) (sum (prod) (prod) (prod)))",
            Some(6),
        ),
    ];
    for (src, want) in cases {
        let v = eval(
            &parse(src).map_err(|e| e.to_string())?,
            &Env::new(),
            DEFAULT_BUDGET,
        )
        .map_err(|e| e.to_string())?;
        ensure(v.cardinality() == want, || {
            format!("{src}: expected {want:?}, got {:?}", v.cardinality())
        })?;
    }
    Ok("5 closed forms".into())
}

fn format_round_trips() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|e| e.expect("entry").path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("pg" | "mu")))
        .collect();
    files.sort();
    let (mut games, mut terms) = (0, 0);
    for p in &files {
        let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
        let again = if p.extension().is_some_and(|e| e == "pg") {
            games += 1;
            print_pg(&parse_pg(&text).map_err(|e| format!("{}: {e}", p.display()))?)
        } else {
            terms += 1;
            let t = parse(&text).map_err(|e| format!("{}: {e}", p.display()))?;
            debug_assert_eq!(print(&t) + "\n", to_file(&t));
            to_file(&t)
        };
        ensure(again == text, || {
            format!("{} does not reprint identically", p.display())
        })?;
    }
    ensure(files.len() >= 50, || {
        format!("only {} fixtures", files.len())
    })?;
    Ok(format!(
        "{} fixtures ({games} games, {terms} terms) reprint byte-identically",
        files.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("solver soundness", solver_soundness),
        ("emptiness matches the winner", emptiness),
        ("strategy counts match cardinalities", counting),
        (
            "simultaneous and nested fixed points agree",
            bekic_preservation,
        ),
        ("pairing identity", pairing),
        ("fold and unfold are inverse bijections", lambek),
        ("functor laws", functor_laws),
        ("closed forms", closed_forms),
        ("format round trips", format_round_trips),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
