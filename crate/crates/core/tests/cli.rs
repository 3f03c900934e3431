use padic_core::cli::{parse_instance, run, serialize_instance, EXIT_USAGE};
use padic_core::model::classify_instance;
use proptest::prelude::*;

fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("padic").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn triangle_coloring_is_sat() {
    let (code, k3, _) = call(&["gen", "coloring", "--graph", "complete:3"], "");
    assert_eq!(code, 0);
    let (code, out, _) = call(&["solve", "--witness", "-"], &k3);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("sat"));
    let wit: String = out.lines().filter(|l| l.starts_with("wit")).map(|l| format!("{l}\n")).collect();
    let dir = std::env::temp_dir().join(format!("padic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k3.wit");
    std::fs::write(&path, wit).unwrap();
    let (code, out, _) = call(&["check", "-w", path.to_str().unwrap(), "-"], &k3);
    assert_eq!((code, out.trim()), (0, "valid"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn k4_coloring_is_unsat() {
    let (_, k4, _) = call(&["gen", "coloring", "--graph", "complete:4"], "");
    let (code, out, _) = call(&["solve", "-"], &k4);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn negative_valuation_of_one_is_unsat() {
    let (code, out, _) = call(&["solve", "-e", "vars x; eq x = 1; val 2 : v(x) <= -1"], "");
    assert_eq!(code, 1);
    assert!(out.starts_with("unsat"));
}

#[test]
fn classify_reports_hard_fragment() {
    let (code, out, _) = call(&["classify", "-e", "vars x; val 3 : v(x) == 0"], "");
    assert_eq!(code, 0);
    assert!(out.contains("HARD (NP-complete fragment)"), "{out}");
}

#[test]
fn parse_error_exits_with_usage_code() {
    let (code, _, err) = call(&["solve", "-e", "vars x; val 4 : v(x) >= 0"], "");
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("not a prime"), "{err}");
    let (code, _, _) = call(&["solve", "--no-such-flag"], "");
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn json_output_schema() {
    let (code, out, _) = call(
        &["--json", "solve", "--witness", "-e", "vars x y; eq x + y = 1; val 3 : v(x) >= 2"],
        "",
    );
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["status"], "sat");
    assert_eq!(v["fragment"], "3:GEQ_P");
    assert!(v["stats"]["size"].is_u64());
    assert!(v["stats"]["time_ms"].is_f64());
    assert!(v["witness"]["x"]["terms"].is_array());
}

#[test]
fn oracle_refuses_other_fragments() {
    let (code, _, _) = call(&["oracle", "-e", "vars x; val 3 : v(x) <= 0"], "");
    assert_ne!(code, 0);
}

fn arb_instance() -> impl Strategy<Value = String> {
    let coeff = (-9i64..10, 1i64..5).prop_map(|(n, d)| format!("{n}/{d}"));
    let eq = (prop::collection::vec(coeff.clone(), 3), coeff.clone())
        .prop_map(|(c, r)| format!("eq {} x + {} y + {} z = {}", c[0], c[1], c[2], r));
    let val = (
        prop::sample::select(vec![2u64, 3, 5]),
        prop::sample::select(vec!["x", "y", "z"]),
        prop::sample::select(vec!["<=", ">=", "==", "!=", "<", ">"]),
        -20i64..20,
    )
        .prop_map(|(p, v, r, b)| format!("val {p} : v({v}) {r} {b}"));
    let ord = (prop::collection::vec(coeff.clone(), 3), coeff, prop::bool::ANY).prop_map(|(c, r, strict)| {
        format!("ord {} x + {} y + {} z {} {}", c[0], c[1], c[2], if strict { "<" } else { "<=" }, r)
    });
    (
        prop::collection::vec(eq, 0..3),
        prop::collection::vec(val, 0..5),
        prop::collection::vec(ord, 0..2),
    )
        .prop_map(|(e, v, o)| {
            let mut s = String::from("vars x y z\n");
            for l in e.iter().chain(&v).chain(&o) {
                s.push_str(l);
                s.push('\n');
            }
            s
        })
}

proptest! {
    #[test]
    fn serialize_round_trips(text in arb_instance()) {
        let inst = parse_instance(&text).unwrap();
        let again = parse_instance(&serialize_instance(&inst)).unwrap();
        prop_assert_eq!(inst, again);
    }

    #[test]
    fn classification_ignores_constraint_order(text in arb_instance(), seed in any::<u64>()) {
        let mut lines: Vec<&str> = text.lines().skip(1).collect();
        let n = lines.len();
        if n > 1 {
            lines.rotate_left((seed as usize) % n);
        }
        let shuffled = format!("vars x y z\n{}\n", lines.join("\n"));
        let a = classify_instance(&parse_instance(&text).unwrap());
        let b = classify_instance(&parse_instance(&shuffled).unwrap());
        prop_assert_eq!(a, b);
    }
}
