use costcap::cli::main_with_args;

fn data(name: &str) -> String {
    format!("{}/data/{name}.graph", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("costcap").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn value(csv: &str, key: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("{key} missing in {csv}"))
        .parse()
        .unwrap()
}

#[test]
fn capacity_report() {
    let (code, out, err) = run(&["capacity", &data("alt2")]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("key,value\n"));
    assert!((value(&out, "C") - 0.694241913631).abs() < 1e-11);
    assert!((value(&out, "alpha_lo") - 2.0 / 3.0).abs() < 1e-11);
    assert_eq!(value(&out, "alpha_up"), 1.0);
}

#[test]
fn analyze_report() {
    let (code, out, _) = run(&["analyze", &data("fig2e")]);
    assert_eq!(code, 0);
    assert!(out.contains("\nd,2\n") && out.contains("\nc,3\n"));
    assert!(out.contains("B,v3,1/1"));
}

#[test]
fn count_matches_library() {
    let (code, out, _) = run(&["count", &data("alt2"), "--t", "40"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    assert_eq!(last, "40,,433494436");
    let (_, out, _) = run(&["count", &data("telegraph"), "--t", "40"]);
    assert_eq!(out.lines().last().unwrap(), "40,,2625473");
    let (_, out, _) = run(&["count", &data("alt2"), "--t", "6", "--n", "4"]);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn curve_single_alpha() {
    let (code, out, _) = run(&["curve", &data("alt2"), "--alpha", "0.8"]);
    assert_eq!(code, 0);
    assert!(out.contains("0.649022499567"), "{out}");
    let (code, out, _) = run(&["curve", &data("alt2"), "--samples", "10", "--sequential"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1 + 12);
}

#[test]
fn boundary_alpha_warns() {
    let (code, out, err) = run(&["curve", &data("alt2"), "--alpha", "1"]);
    assert_eq!(code, 0);
    assert!(err.starts_with("warning,boundary,"), "{err}");
    assert!(out.lines().nth(1).unwrap().contains(",0,"), "{out}");
}

#[test]
fn synthesis_with_builtin_constraint() {
    let (code, out, err) = run(&[
        "synth",
        "--period",
        "ACGT",
        "--period",
        "ACG",
        "--constraint",
        "min-run:T:2",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].starts_with("ACGT,0.718802907357"), "{out}");
    assert!(rows[1].starts_with("ACG,0.879146421607"), "{out}");
    let (code, out, _) = run(&[
        "synth",
        "--period",
        "ACGT",
        "--constraint-file",
        &data("min_run_tt"),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("0.718802907357"));
}

#[test]
fn product_outputs_graph_and_warns_on_disjoint_alphabets() {
    let (code, out, err) = run(&["product", &data("alt2"), &data("rll")]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
    let g = costcap::parse_graph(&out).unwrap();
    assert_eq!(g.num_vertices(), 4);
    let (code, out, err) = run(&["product", &data("alt2"), &data("telegraph")]);
    assert_eq!(code, 0);
    assert!(err.starts_with("warning,alphabet,"));
    assert!(!out.contains("edge"));
}

#[test]
fn exact_expansion_table() {
    let (code, out, _) = run(&["exact", &data("alt2")]);
    assert_eq!(code, 0);
    assert!(
        out.lines()
            .any(|l| l.starts_with("0,0.61803398875,0,1,1,0,1.894427191")),
        "{out}"
    );
    let (code, out, _) = run(&["exact", &data("alt2"), "--polynomials"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("poly,power,coefficient\nH,0,1\n"), "{out}");
    assert!(out.contains("Q,2,-1"));
}

#[test]
fn asymptotics_against_dp() {
    let (code, out, err) = run(&["asympt", &data("alt2"), "--t", "200", "--n", "100"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("linear"), "{out}");
    assert!((value(&out, "ratio") - 1.0).abs() < 1e-3, "{out}");
}

#[test]
fn error_codes() {
    let (code, _, err) = run(&["capacity", "/nonexistent.graph"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error,io,"), "{err}");
    let (code, _, err) = run(&["capacity", &data("rll")]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error,"), "{err}");
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["synth", "--period", "AC", "--constraint", "max-run:A:0"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error,synthesis,"), "{err}");
}
