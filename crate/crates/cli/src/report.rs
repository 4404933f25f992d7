use serde_json::{json, Map, Value};

use diffext::verify::Report;

/// JSON form of a report with a fixed key order:
/// check, params, counts, pass, fitted_coefficients, values,
/// counterexample, millis.
pub fn report_json(r: &Report, timing: bool) -> Value {
    let mut m = Map::new();
    m.insert("check".into(), json!(r.check));
    m.insert("params".into(), Value::Object(r.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
    m.insert("counts".into(), Value::Object(r.counts.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
    m.insert("pass".into(), json!(r.pass));
    if let Some(f) = &r.fitted {
        m.insert(
            "fitted_coefficients".into(),
            Value::Object(f.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect()),
        );
    }
    if !r.values.is_empty() {
        m.insert("values".into(), Value::Object(r.values.iter().map(|(k, v)| (k.clone(), json!(v))).collect()));
    }
    if let Some(c) = &r.counterexample {
        m.insert(
            "counterexample".into(),
            json!({
                "probe": c.probe,
                "state": c.state,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "difference": c.difference,
            }),
        );
    }
    if timing {
        m.insert("millis".into(), json!(r.millis as u64));
    }
    Value::Object(m)
}

pub fn campaign_json(reports: &[Report], timing: bool) -> Value {
    json!({
        "pass": reports.iter().all(|r| r.pass),
        "reports": reports.iter().map(|r| report_json(r, timing)).collect::<Vec<_>>(),
    })
}

/// One line per report, plus the counterexample of a failing one.
pub fn summary(reports: &[Report], timing: bool) -> String {
    let mut s = String::new();
    for r in reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s += &format!("{} {} ({})", if r.pass { "PASS" } else { "FAIL" }, r.check, params.join(", "));
        if timing {
            s += &format!(" {} ms", r.millis);
        }
        s.push('\n');
        if let Some(f) = &r.fitted {
            let v: Vec<String> = f.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s += &format!("    fitted: {}\n", v.join(", "));
        }
        if let Some(c) = &r.counterexample {
            s += &format!("    probe: {}\n", c.probe);
            if !c.state.is_empty() {
                s += &format!("    state: {}\n", c.state);
            }
            s += &format!("    lhs: {}\n", c.lhs);
            if !c.rhs.is_empty() {
                s += &format!("    rhs: {}\n    difference: {}\n", c.rhs, c.difference);
            }
        }
    }
    s
}
