use normsol_core::analytic::GnConstant;
use normsol_core::fiber::NormQuadruple;
use normsol_core::harness::DecayCheck;
use normsol_core::json;
use proptest::prelude::*;
use serde_json::Value;

proptest! {
    #[test]
    fn numbers_round_trip_bit_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = serde_json::to_string(&json::num(x)).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        let y: f64 = back.to_string().parse().unwrap();
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn numbers_keep_seventeen_digits() {
    assert_eq!(json::num(0.1f64).to_string(), "1.0000000000000001e-1");
    assert_eq!(json::num(-94.78f64).to_string(), "-9.4780000000000001e+1");
    assert_eq!(json::num(f64::NAN), Value::String("NaN".into()));
    assert_eq!(json::num(f64::NEG_INFINITY), Value::String("-inf".into()));
}

#[test]
fn records_carry_their_fields() {
    let q = NormQuadruple::new(4.0, 2.0, 1.0, 1.0).unwrap();
    let v = json::quadruple(&q);
    assert_eq!(v["dd"].to_string(), "4.0000000000000000e+0");
    let gn = json::gn_constant(&GnConstant::user(0.25f64).unwrap());
    assert_eq!(gn["provenance"]["kind"], "user");
    let d = json::decay(&DecayCheck {
        fitted: 0.2,
        predicted: 0.7,
        margin: -0.45,
        linearized: 0.17,
        window: (40.0, 90.0),
    });
    assert_eq!(d["window"].as_array().unwrap().len(), 2);
    let o = json::object(vec![("b", 1.into()), ("a", 2.into())]);
    assert_eq!(o["a"], 2);
}
