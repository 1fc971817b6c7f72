use serde_json::Value;

use momapf_demo::{plan_pareto, safe_intervals, solve_mapf};

// a b c
// d e f
const MAP: &str = "type octile\nheight 2\nwidth 3\nmap\n...\n...\n";

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn intervals_split_around_blocked_steps() {
    let out = parse(safe_intervals(MAP, r#"[{"cell":[0,1],"time":2},{"cell":[1,1],"time":3}]"#));
    let cells = out["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    let at = |r: u64, c: u64| cells.iter().find(|x| x["cell"] == serde_json::json!([r, c])).unwrap()["intervals"].clone();
    assert_eq!(at(0, 1), serde_json::json!([[0, 1], [3, null]]));
    assert_eq!(at(1, 1), serde_json::json!([[0, 2], [4, null]]));
    assert_eq!(at(0, 0), serde_json::json!([[0, null]]));
}

#[test]
fn both_planners_return_the_same_front() {
    let req = r#"{"start":[0,0],"goal":[1,2],"objectives":2,"seed":3,"blocks":[{"cell":[0,1],"time":1}]}"#;
    let out = parse(plan_pareto(MAP, req));
    assert!(out.get("error").is_none(), "{out}");
    assert_eq!(out["sipp"]["costs"], out["tx"]["costs"]);
    assert_eq!(out["sipp"]["status"], "Solved");
    for path in out["sipp"]["paths"].as_array().unwrap() {
        assert_eq!(path[0], serde_json::json!([0, 0]));
        assert_eq!(path.as_array().unwrap().last().unwrap(), &serde_json::json!([1, 2]));
    }
}

#[test]
fn two_agents_swap_sides() {
    let req = r#"{"agents":[{"start":[0,0],"goal":[0,2]},{"start":[0,2],"goal":[0,0]}],"seed":1,"backend":"sipp"}"#;
    let out = parse(solve_mapf(MAP, req));
    assert_eq!(out["complete"], true, "{out}");
    assert_eq!(out["backend"], "sipp");
    assert!(!out["solutions"].as_array().unwrap().is_empty());
}

#[test]
fn errors_are_reported_as_json() {
    let out = parse(plan_pareto(MAP, r#"{"start":[5,5],"goal":[0,0]}"#));
    assert!(out["error"].as_str().unwrap().contains("not passable"));
    let out = parse(safe_intervals("not a map", "[]"));
    assert!(out["error"].is_string());
    let out = parse(solve_mapf(MAP, "{"));
    assert!(out["error"].is_string());
}
