//! JSON records of results, every float written with 17 significant digits.

use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::analytic::{GnConstant, GnProvenance};
use crate::fiber::NormQuadruple;
use crate::harness::{BesselWitness, CutoffShape, DecayCheck};
use crate::radial::io::sig17;
use crate::radial::GridSpec;
use crate::scalar::{wide, Scalar};
use crate::solve::{GnEstimate, GnValidation, SolveReport};

/// A float as a JSON number in `{:.16e}` form; non-finite values become strings.
pub fn num<T: Scalar>(x: T) -> Value {
    let x = wide(x);
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    Number::from_str(&sig17(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn nums<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn quadruple<T: Scalar>(q: &NormQuadruple<T>) -> Value {
    json!({ "dd": num(q.dd), "gg": num(q.gg), "pp": num(q.pp), "mm": num(q.mm) })
}

pub fn grid(spec: &GridSpec) -> Value {
    json!({
        "nodes": spec.nodes,
        "rmax": num(spec.rmax),
        "fine_ratio": num(spec.fine_ratio),
        "refine_radius": num(spec.refine_radius),
    })
}

pub fn gn_constant<T: Scalar>(gn: &GnConstant<T>) -> Value {
    let provenance = match gn.provenance {
        GnProvenance::UserSupplied => json!({ "kind": "user" }),
        GnProvenance::Estimated {
            refinement_delta,
            nodes,
        } => {
            json!({ "kind": "estimated", "refinement_delta": num(refinement_delta), "nodes": nodes })
        }
    };
    json!({ "c_np": num(gn.c_np), "provenance": provenance })
}

pub fn gn_estimate<T: Scalar>(est: &GnEstimate<T>, validation: Option<&GnValidation>) -> Value {
    let mut v = gn_constant(&est.constant);
    let o = v.as_object_mut().expect("object");
    o.insert("refined".into(), num(est.refined));
    o.insert("iterations".into(), est.iterations.into());
    if let Some(val) = validation {
        o.insert(
            "validation".into(),
            json!({
                "samples": val.samples,
                "worst_ratio": num(val.worst_ratio),
                "slack": num(val.slack),
                "passed": val.passed(),
            }),
        );
    }
    v
}

/// Report record; `profile_path` names the companion profile file.
pub fn solve_report<T: Scalar>(rep: &SolveReport<T>, profile_path: Option<&str>) -> Value {
    let d = &rep.diagnostics;
    let starts: Vec<Value> = d
        .start_energies
        .iter()
        .map(|e| e.map(num).unwrap_or(Value::Null))
        .collect();
    json!({
        "branch": rep.branch.label(),
        "energy": num(rep.energy),
        "lambda": num(rep.lambda),
        "pohozaev_residual": num(rep.pohozaev_residual),
        "grad_norm": num(rep.grad_norm),
        "iterations": rep.iterations,
        "manifold_class": rep.manifold_class.to_string(),
        "quadruple": quadruple(&rep.quadruple),
        "profile": profile_path,
        "diagnostics": {
            "descent_iterations": d.descent_iterations,
            "newton_iterations": d.newton_iterations,
            "newton_lambda": num(d.newton_lambda),
            "pohozaev_multiplier": num(d.pohozaev_multiplier),
            "free_grad_norm": num(d.free_grad_norm),
            "truncation_ratio": num(d.truncation_ratio),
            "sign_changes": d.sign_changes,
            "energy_history": nums(&d.energy_history),
            "start_energies": starts,
        },
    })
}

pub fn decay(check: &DecayCheck) -> Value {
    json!({
        "fitted": num(check.fitted),
        "predicted": num(check.predicted),
        "margin": num(check.margin),
        "linearized": num(check.linearized),
        "window": [num(check.window.0), num(check.window.1)],
    })
}

pub fn witness(w: &BesselWitness, profile_path: Option<&str>) -> Value {
    let cutoff = match w.cutoff {
        CutoffShape::Standard => json!({ "shape": "standard" }),
        CutoffShape::Ramp { eps } => json!({ "shape": "ramp", "eps": num(eps) }),
    };
    json!({
        "m": num(w.m),
        "cutoff": cutoff,
        "mass_sq": num(w.mass_sq),
        "target_mass_sq": num(w.target_mass_sq),
        "laplacian_norm": num(w.laplacian_norm),
        "tau_tilde": num(w.tau_tilde),
        "laplacian_cap": num(w.laplacian_cap),
        "phi0_value": num(w.phi0_value),
        "phi0_resolvent": num(w.phi0_resolvent),
        "bound_margin": num(w.bound_margin),
        "certified": w.certifies(),
        "implied_bound": num(w.implied_bound),
        "implied_bound_direct": num(w.implied_bound_direct),
        "reference_level": num(w.reference_level),
        "profile": profile_path,
    })
}

/// Object from key-value pairs.
pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}
