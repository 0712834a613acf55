use serde_json::Value;
use thetalift_web::{discriminant_json, theta_json, weil_matrix_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn discriminant_of_a2() {
    let v = parse(&discriminant_json("[[2,-1],[-1,2]]").unwrap());
    assert_eq!(v["orders"], serde_json::json!([3]));
    assert_eq!(v["q"], serde_json::json!(["1/3"]));
    assert_eq!(v["signature"], serde_json::json!([2, 0]));
}

#[test]
fn weil_s_squares_to_the_sign_on_a1() {
    let v = parse(&weil_matrix_json("[[2]]", "S,S").unwrap());
    assert_eq!(v["dim"], 4);
    // Genus 2: ρ(S²) = (i^{b⁻−b⁺})²·(e_σ ↦ e_{−σ}), and on A1 every σ = −σ.
    for i in 0..4 {
        let z = &v["matrix"][i][i];
        assert!((z[0].as_f64().unwrap() + 1.0).abs() < 1e-12 && z[1].as_f64().unwrap().abs() < 1e-12, "{z}");
    }
}

#[test]
fn theta_and_errors() {
    let v = parse(&theta_json("[[2]]", "[[0,1],[0,0],[0,1]]", 1e-10).unwrap());
    assert!(v["values"][0][0].as_f64().unwrap() > 1.0);
    assert!(theta_json("[[2]]", "[[0,1]]", 1e-10).is_err());
    assert!(theta_json("[[1]]", "[[0,1],[0,0],[0,1]]", 1e-10).is_err());
    assert!(theta_json("[[2]]", "[[0,1],[0,0],[0,1]]", 0.0).is_err());
    assert!(weil_matrix_json("[[2,0],[0,2],[0,0]]", "S").is_err());
}
