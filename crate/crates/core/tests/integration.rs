use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symbreak::bifurcation::{continue_branch, isotropy_types, ContinuationSettings, GFunction, Seed};
use symbreak::poly::{PolyMap, Polynomial};
use symbreak::reduction::{reduce, FieldFamily};
use symbreak::scenario::{load_scenario, parse_scenario, BuildOptions, Model};
use symbreak::simulate::{commutation_error, integrate_poly};

fn model(name: &str) -> Model {
    Model::build(&load_scenario(name).unwrap(), &BuildOptions::default()).unwrap()
}

fn model_json(text: &str) -> Model {
    Model::build(&parse_scenario(text).unwrap(), &BuildOptions::default()).unwrap()
}

#[test]
fn restrict_to_reflection_line() {
    let d3 = model("d3-plane");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let types = isotropy_types(&d3.group, &mut rng);
    let mirror = types.iter().find(|t| t.label.finite_order == 2).expect("reflection type");
    let r = d3.restrict_to_fixed_space(&mirror.subgroup).unwrap();
    assert_eq!(r.group.dim(), 1);
    assert_eq!(r.group.order(), 1);
    assert_eq!(r.full_field.len(), 1);
}

#[test]
fn restrict_to_whole_group_has_no_fixed_space() {
    let z2 = model("z2-pitchfork");
    match z2.restrict_to_fixed_space(&z2.group.whole()) {
        Err(e) => assert!(e.to_string().contains("zero fixed space")),
        Ok(_) => panic!("restriction to the whole group succeeded"),
    }
}

#[test]
fn restrict_to_trivial_subgroup_is_identity() {
    let d3 = model("d3-plane");
    let r = d3.restrict_to_fixed_space(&d3.group.trivial_subgroup()).unwrap();
    assert_eq!(r.group.dim(), 2);
    assert_eq!(r.group.order(), 6);
    assert_eq!(r.basis.generators(), d3.basis.generators());
}

#[test]
fn fixed_space_points_keep_their_isotropy() {
    let d3 = model("d3-plane");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in isotropy_types(&d3.group, &mut rng) {
        for (k, b) in t.fixed_basis.iter().enumerate() {
            let v: Vec<f64> = b.iter().map(|x| x * (0.3 + k as f64)).collect();
            let h = d3.group.isotropy(&v, 1e-9).unwrap();
            assert!(d3.group.is_subconjugate(&t.subgroup, &h), "{}", t.label);
        }
    }
}

#[test]
fn scaling_the_hamiltonian_scales_the_reduced_field() {
    let s1 = model("s1-resonance");
    let FieldFamily::Hamiltonian { hamiltonian, pairing } = &s1.family else {
        panic!("hamiltonian family");
    };
    let c = symbreak::poly::rat(7, 3);
    let scaled = FieldFamily::Hamiltonian {
        hamiltonian: hamiltonian.scale(&c),
        pairing: pairing.clone(),
    };
    let r = reduce(&scaled, &s1.basis).unwrap();
    assert_eq!(r.field(), &s1.reduced.field().scale(&c));
}

#[test]
fn horizontal_branch_of_a_constant_root() {
    let names = ["t1", "lambda"];
    let g = GFunction::new(
        PolyMap::from_components(2, vec![Polynomial::parse("t1 - 1", &names).unwrap()]),
        Vec::new(),
        Vec::new(),
    )
    .unwrap();
    let seed = Seed {
        theta: vec![1.0],
        lambda: 0.0,
        levels: None,
        condition_number: 1.0,
    };
    let r = continue_branch(&g, &seed, -1.0, 1.0, &ContinuationSettings::default()).unwrap();
    assert_eq!(r.points.first().unwrap().lambda, -1.0);
    assert_eq!(r.points.last().unwrap().lambda, 1.0);
    assert!(r.points.iter().all(|p| (p.theta[0] - 1.0).abs() < 1e-12));
}

#[test]
fn pitchfork_flow_reaches_the_attractor() {
    let z2 = model("z2-pitchfork");
    let t = integrate_poly(&z2.full_field, &[1.0], &[0.1], 10.0, 1e-3, 100).unwrap();
    assert!((t.last()[0] - 1.0).abs() < 1e-4);
}

#[test]
fn full_flow_is_equivariant() {
    let d3 = model("d3-plane");
    let v0 = [0.4, -0.7];
    let base = integrate_poly(&d3.full_field, &[0.5], &v0, 5.0, 1e-3, 50).unwrap();
    for g in 0..d3.group.order() {
        let gv = d3.group.act(g, &v0).unwrap();
        let moved = integrate_poly(&d3.full_field, &[0.5], &gv, 5.0, 1e-3, 50).unwrap();
        for (a, b) in moved.states.iter().zip(&base.states) {
            let gb = d3.group.act(g, b).unwrap();
            let d: f64 = a.iter().zip(&gb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 1e-8, "element {g}: {d}");
        }
    }
}

#[test]
fn mismatched_reduced_field_is_detected() {
    let z2 = model("z2-pitchfork");
    let wrong = z2.reduced.field().scale(&symbreak::poly::rat(-1, 1));
    let full = integrate_poly(&z2.full_field, &[1.0], &[0.5], 5.0, 1e-3, 10).unwrap();
    let th0 = z2.basis.hilbert_map(&[0.5]);
    let good = integrate_poly(z2.reduced.field(), &[1.0], &th0, 5.0, 1e-3, 10).unwrap();
    let bad = integrate_poly(&wrong, &[1.0], &th0, 5.0, 1e-3, 10).unwrap();
    assert!(commutation_error(&full, &good, &z2.basis).unwrap() <= 1e-6);
    assert!(commutation_error(&full, &bad, &z2.basis).unwrap() > 0.1);
}

#[test]
fn harmonic_oscillator_on_the_trivial_orbit_space() {
    let m = model_json(
        r#"{"name":"osc","coordinates":["q","p"],"group":{},"basis":{"mode":"discover"},
        "field":{"kind":"hamiltonian","hamiltonian":"1/2*t1^2 + 1/2*t2^2","pairing":[[0,1]]},
        "lambda":{"seed":0,"range":[0,1]}}"#,
    );
    let names = ["t1", "t2", "lambda"];
    let want = PolyMap::from_components(
        3,
        vec![Polynomial::parse("t2", &names).unwrap(), Polynomial::parse("-t1", &names).unwrap()],
    );
    assert_eq!(m.reduced.field(), &want);
}

#[test]
fn isotropy_chain_of_the_pitchfork() {
    let z2 = model("z2-pitchfork");
    let origin = z2.group.isotropy(&[0.0], 1e-9).unwrap();
    let off = z2.group.isotropy(&[0.3], 1e-9).unwrap();
    assert_eq!(z2.group.label(&origin).key, "G");
    assert_eq!(z2.group.label(&off).key, "trivial");
    assert!(z2.group.is_subconjugate(&off, &origin));
    assert!(!z2.group.is_subconjugate(&origin, &off));
}
