//! End-to-end acceptance checks, one line per criterion.

mod common;

use std::time::{Duration, Instant};

use common::*;
use costcap::capacity::{
    alpha_lo, capacity_curve, fixed_length_capacity, variable_length_capacity, CapacityModel,
};
use costcap::counting::{
    asymptotic_fixed_length, count_fixed, count_table, count_totals, exact_expansion, ln_biguint,
};
use costcap::par::Execution;
use costcap::spectral::{
    adjugate_rank1_check, cost_matrix, linspace, loglog_convexity_check, perron, spectral_radius,
    spectral_rotation_check,
};
use costcap::structure::analyze_structure;
use costcap::synthesis::{
    binary_alternating_fixed, finite_subsequence_oracle, label_product, periodic_prefix,
    synthesis_capacity, ternary_alternating_fixed, SynthesisSpec,
};
use num_bigint::BigUint;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{name}: got {got}, want {want} (tol {tol:e})")
    })
}

fn run(id: &str, budget: Duration, check: impl FnOnce() -> Check) -> bool {
    let t0 = Instant::now();
    let outcome = check();
    let elapsed = t0.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over budget {budget:?}")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {id:>2}: {} [{:.3}s] {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn criterion_1() -> Check {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::new();
    for (r, want, tol) in [
        ("AC", golden.log2(), 1e-9),
        ("ACG", 0.879, 1e-3),
        ("ACGT", 0.947, 1e-3),
    ] {
        let t0 = Instant::now();
        let c = variable_length_capacity(&g_of(r))
            .map_err(|e| e.to_string())?
            .capacity;
        within(&format!("C(G({r}))"), c, want, tol)?;
        ensure(t0.elapsed() < Duration::from_secs(1), || {
            format!("{r} took {:?}", t0.elapsed())
        })?;
        out.push(format!("{r}={c:.10}"));
    }
    Ok(out.join(" "))
}

fn criterion_2() -> Check {
    let cap = |r: &str, constrained: bool| -> Result<f64, String> {
        let spec =
            SynthesisSpec::new(r, constrained.then(|| min_run_tt(r))).map_err(|e| e.to_string())?;
        Ok(synthesis_capacity(&spec)
            .map_err(|e| e.to_string())?
            .capacity)
    };
    let acgt = cap("ACGT", true)?;
    let acg = cap("ACG", true)?;
    let plain = cap("ACG", false)?;
    within("C((ACGT),G_TT)", acgt, 0.7188, 1e-3)?;
    within("C((ACG),G_TT)", acg, 0.8791, 1e-3)?;
    within("C((ACG),G_TT) - C(G(ACG))", acg, plain, 1e-10)?;
    Ok(format!(
        "ACGT={acgt:.10} ACG={acg:.10} |diff|={:.1e}",
        (acg - plain).abs()
    ))
}

fn criterion_3() -> Check {
    for (name, g) in [("G(AC)", g_of("AC")), ("telegraph", data("telegraph"))] {
        let v = g.start().unwrap();
        let totals = count_totals(&g, v, 40).map_err(|e| e.to_string())?;
        let exp = exact_expansion(&g, v).map_err(|e| e.to_string())?;
        for (t, n) in totals.iter().enumerate() {
            let got = exp.eval_rounded(t as u64).map_err(|e| e.to_string())?;
            ensure(got.to_biguint().as_ref() == Some(n), || {
                format!("{name} t={t}: expansion {got}, DP {n}")
            })?;
        }
    }
    Ok("t<=40 exact for G(AC), telegraph".into())
}

fn criterion_4() -> Check {
    let ac = g_of("AC");
    let acg = g_of("ACG");
    let mut worst = 0f64;
    for a in [0.70, 0.75, 0.80, 0.90] {
        let got = fixed_length_capacity(&ac, a)
            .map_err(|e| e.to_string())?
            .capacity;
        within(
            &format!("C_r2({a})"),
            got,
            binary_alternating_fixed(a),
            1e-9,
        )?;
        worst = worst.max((got - binary_alternating_fixed(a)).abs());
    }
    for a in [0.55, 0.62, 0.70] {
        let got = fixed_length_capacity(&acg, a)
            .map_err(|e| e.to_string())?
            .capacity;
        within(
            &format!("C_r3({a})"),
            got,
            ternary_alternating_fixed(a),
            1e-9,
        )?;
        worst = worst.max((got - ternary_alternating_fixed(a)).abs());
    }
    let lo = alpha_lo(&ac).map_err(|e| e.to_string())?;
    ensure(lo == 2.0 / 3.0, || format!("alpha_lo(G(AC)) = {lo}"))?;
    Ok(format!("max |err| {worst:.1e}, alpha_lo = {lo}"))
}

fn criterion_5() -> Check {
    let g = g_of("AC");
    let model = CapacityModel::new(&g).map_err(|e| e.to_string())?;
    let alo = model.alpha_lo();
    let aup = model.alpha_up();
    let grid = linspace(alo, aup, 201);
    let caps = grid
        .iter()
        .map(|&a| model.fixed_length(a).map(|f| f.capacity))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let max_dd = caps
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::MIN, f64::max);
    ensure(max_dd <= 1e-8, || {
        format!("second difference {max_dd:e} > 1e-8")
    })?;
    let c = model.variable_length().map_err(|e| e.to_string())?.capacity;
    let x0 = 2f64.powf(-c);
    let closed = 1.0
        / (x0
            * perron(model.matrix(), x0)
                .map_err(|e| e.to_string())?
                .rho_prime);
    let star = model.alpha_star().map_err(|e| e.to_string())?;
    within("alpha*", star, closed, 1e-9)?;
    let at_star = model
        .fixed_length(star)
        .map_err(|e| e.to_string())?
        .capacity;
    within("C(alpha*)", at_star, c, 1e-9)?;
    let mut argmaxes = Vec::new();
    for (q, r, tick) in [(2, "AC", 0.72), (3, "ACG", 0.62), (4, "ACGT", 0.57)] {
        let curve = capacity_curve(&g_of(r), 8, Execution::default()).map_err(|e| e.to_string())?;
        let m = CapacityModel::new(&g_of(r)).map_err(|e| e.to_string())?;
        let mut best = (0.0, f64::MIN);
        for k in 1..200 {
            let a = k as f64 * 0.005;
            if a <= curve.alpha_lo || a >= curve.alpha_up {
                continue;
            }
            let cap = m.fixed_length(a).map_err(|e| e.to_string())?.capacity;
            if cap > best.1 {
                best = (a, cap);
            }
        }
        within(&format!("alpha* q={q}"), curve.alpha_star, tick, 0.005)?;
        within(
            &format!("grid argmax q={q}"),
            best.0,
            curve.alpha_star,
            0.005,
        )?;
        argmaxes.push(format!("q{q}={:.3}", best.0));
    }
    Ok(format!(
        "max dd {max_dd:.1e}, alpha*={star:.10}, {}",
        argmaxes.join(" ")
    ))
}

fn ratio(g: &costcap::ChannelGraph, v: usize, t: u64, n: u64) -> Result<f64, String> {
    let dp = count_fixed(g, v, t as usize, n as usize).map_err(|e| e.to_string())?;
    let est = asymptotic_fixed_length(g, v, n, t).map_err(|e| e.to_string())?;
    Ok((ln_biguint(&dp) - est.ln_estimate).exp())
}

fn criterion_6() -> Check {
    let g = g_of("AC");
    let v = g.start().unwrap();
    let lin = ratio(&g, v, 200, 100)?;
    ensure((0.999..=1.001).contains(&lin), || {
        format!("linear ratio {lin}")
    })?;
    let ts = [100u64, 200, 400, 800];
    let rs = ts
        .iter()
        .map(|&t| ratio(&g, v, t, t * 4 / 5))
        .collect::<Result<Vec<_>, _>>()?;
    ensure((rs[3] - 1.0).abs() <= 0.1, || {
        format!("concave ratio at t=800: {}", rs[3])
    })?;
    let gaps: Vec<f64> = rs.iter().map(|r| (r - 1.0).abs()).collect();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), || {
        format!("ratios not monotone: {rs:?}")
    })?;

    let one = data("alternating");
    let (t, n) = (800u64, 640u64);
    let a = n as f64 / t as f64;
    let tf = t as f64;
    let closed = tf * ((2.0 * a - 1.0) / (1.0 - a)).ln()
        + a * tf * (a * (1.0 - a) / (1.0 - 2.0 * a).powi(2)).ln()
        - 0.5 * tf.ln()
        + ((2.0 * a - 1.0) * a).sqrt().ln()
        - ((3.0 * a - 2.0) * (2.0 * std::f64::consts::PI * (1.0 - a)).sqrt()).ln();
    let est = asymptotic_fixed_length(&one, 0, n, t).map_err(|e| e.to_string())?;
    let rel = (est.ln_estimate - closed).abs();
    ensure(rel <= 1e-9, || {
        format!("closed form ln {closed} vs estimate ln {}", est.ln_estimate)
    })?;
    Ok(format!(
        "linear {lin:.6}, concave {}, closed-form rel {rel:.1e}",
        rs.iter()
            .map(|r| format!("{r:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    ))
}

fn criterion_7() -> Check {
    let s = |g: &costcap::ChannelGraph| analyze_structure(g).map_err(|e| e.to_string());
    let a = s(&fig_a())?;
    ensure(!a.cost_diverse && a.cost_period == 0, || {
        format!("(a) {a:?}")
    })?;
    let b = s(&fig_b())?;
    ensure(b.cost_diverse && b.cost_period == 2, || {
        format!("(b) {b:?}")
    })?;
    let c = s(&fig_c())?;
    ensure(!c.cost_diverse && c.cost_period == 0, || {
        format!("(c) {c:?}")
    })?;
    let d = s(&fig_d())?;
    ensure(
        d.cost_diverse && (d.period, d.cost_period) == (1, 2),
        || format!("(d) {d:?}"),
    )?;
    let e = s(&fig_e())?;
    ensure(
        e.cost_diverse && (e.period, e.cost_period) == (2, 3),
        || format!("(e) {e:?}"),
    )?;
    for r in PERIODS {
        let st = s(&g_of(r))?;
        let m = r.len() as u64;
        ensure((st.period, st.cost_period) == (1, m), || {
            format!("G({r}): d={} c={}", st.period, st.cost_period)
        })?;
    }
    Ok("figures (a)-(e) and G(r) classified".into())
}

fn criterion_8() -> Check {
    let mut worst_deriv = 0f64;
    let mut worst_sim = 0f64;
    let mut min_drop = f64::INFINITY;
    for (name, g) in positive_cost_graphs() {
        let st = analyze_structure(&g).map_err(|e| e.to_string())?;
        let p = cost_matrix(&g);
        for x in [0.3, 0.7, 1.0, 1.5] {
            let sp = perron(&p, x).map_err(|e| e.to_string())?;
            let h = 1e-5 * x;
            let fd = (spectral_radius(&p, x + h).map_err(|e| e.to_string())?
                - spectral_radius(&p, x - h).map_err(|e| e.to_string())?)
                / (2.0 * h);
            let rel = (sp.rho_prime - fd).abs() / sp.rho_prime.abs();
            ensure(rel <= 1e-6, || {
                format!("{name} x={x}: rho' {} vs FD {fd}", sp.rho_prime)
            })?;
            worst_deriv = worst_deriv.max(rel);

            let adj = adjugate_rank1_check(&p, x).map_err(|e| e.to_string())?;
            ensure(adj.passed && adj.uniform_sign, || {
                format!("{name} x={x}: adjugate {adj:?}")
            })?;

            if st.cost_period > 0 {
                let rot = spectral_rotation_check(&p, x, st.cost_period, st.b, &st.potentials)
                    .map_err(|e| e.to_string())?;
                ensure(rot.passed && rot.max_similarity_error <= 1e-10, || {
                    format!("{name} x={x}: rotation {rot:?}")
                })?;
                worst_sim = worst_sim.max(rot.max_similarity_error);
                min_drop = min_drop.min(rot.min_off_lattice_drop);
            }
        }
        let conv = loglog_convexity_check(&p, st.cost_diverse, &linspace(-3.0, 0.5, 25))
            .map_err(|e| e.to_string())?;
        ensure(conv.passed, || {
            format!("{name}: convexity {:?}", conv.second_differences)
        })?;
        if !st.cost_diverse {
            let flat = conv.second_differences.iter().all(|d| d.abs() < 1e-6);
            ensure(flat, || {
                format!("{name}: uniform graph curved {:?}", conv.second_differences)
            })?;
        }
    }
    ensure(min_drop > 0.0, || format!("off-lattice drop {min_drop}"))?;
    Ok(format!(
        "rho' rel {worst_deriv:.1e}, similarity {worst_sim:.1e}, min drop {min_drop:.2e}"
    ))
}

fn criterion_9() -> Check {
    for r in PERIODS {
        let g = g_of(r);
        let v = g.start().unwrap();
        let table = count_table(&g, v, 20, 20).map_err(|e| e.to_string())?;
        for t in 0..=20 {
            let prefix = periodic_prefix(r, t);
            for n in 0..=20 {
                let want = finite_subsequence_oracle(&prefix, Some(n));
                ensure(table.get(t, n) == &want, || {
                    format!("G({r}) t={t} n={n}: {} vs {want}", table.get(t, n))
                })?;
            }
            let total: BigUint = table.row_total(t);
            ensure(total == finite_subsequence_oracle(&prefix, None), || {
                format!("G({r}) t={t}: total {total}")
            })?;
        }
    }
    let mut words = 0usize;
    for (r, constraint) in [
        ("ACGT", min_run_tt("ACGT")),
        ("ACG", min_run_tt("ACG")),
        ("AC", data("rll")),
    ] {
        let g = g_of(r);
        let prod = label_product(&g, &constraint);
        let c0 = constraint.start().unwrap();
        let want: std::collections::BTreeSet<String> = words_within(&g, g.start().unwrap(), 10)
            .into_iter()
            .filter(|w| accepts(&constraint, c0, w))
            .collect();
        let got = words_within(&prod, prod.start().unwrap(), 10);
        ensure(got == want, || {
            format!(
                "{r} product language differs ({} vs {})",
                got.len(),
                want.len()
            )
        })?;
        words += got.len();
    }
    Ok(format!(
        "t<=20 counts for {} periods, {words} product words",
        PERIODS.len()
    ))
}

fn criterion_10() -> Check {
    let mut worst = 0f64;
    for (name, g) in positive_cost_graphs() {
        let model = CapacityModel::new(&g).map_err(|e| e.to_string())?;
        let karp = model.alpha_up();
        let numeric = model.alpha_up_numeric(&[1e-5]).map_err(|e| e.to_string())?[0];
        within(&format!("{name} alpha_up"), numeric, karp, 1e-3)?;
        worst = worst.max((numeric - karp).abs());
    }
    Ok(format!("max |karp - numeric| {worst:.1e}"))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run("1", s(3), criterion_1),
        run("2", s(1), criterion_2),
        run("3", s(5), criterion_3),
        run("4", s(5), criterion_4),
        run("5", s(10), criterion_5),
        run("6", s(30), criterion_6),
        run("7", s(1), criterion_7),
        run("8", s(10), criterion_8),
        run("9", s(30), criterion_9),
        run("10", s(5), criterion_10),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
