//! End-to-end checks of the twelve observable relations: the exact ones hold
//! to near machine precision on restriction-preprocessed events, and the
//! approximate variants visibly fail on generic events.

use efpqubo_core::efp::{efp_value, relation_catalog, EfpConfig, ObservableRelation};
use efpqubo_core::events::{generate_events, JetEvent};

fn relative_residual(rel: &ObservableRelation, event: &JetEvent, config: &EfpConfig) -> f64 {
    let target = rel.target.evaluate(event, config).unwrap();
    let mut fit = 0.0;
    // scale against the terms that cancel, not the (possibly ~0) target:
    // det C vanishes identically on M = 2 events, for instance
    let mut scale = target.abs();
    for &(idx, coeff) in &rel.expected_support {
        let term = coeff * efp_value(&rel.basis[idx].graph, event, config);
        fit += term;
        scale = scale.max(term.abs());
    }
    (target - fit).abs() / scale.max(1e-300)
}

#[test]
fn exact_relations_hold_on_preprocessed_events() {
    let config = EfpConfig::default();
    let events = generate_events(200, (2, 12), 100.0, 0.4, 42).unwrap();
    for rel in relation_catalog() {
        if rel.approximate {
            continue;
        }
        for (i, ev) in events.iter().enumerate() {
            let ev = rel.restriction.apply(ev, 1000 + i as u64).unwrap();
            let res = relative_residual(&rel, &ev, &config);
            assert!(
                res < 1e-8,
                "relation ({}) residual {res} on event {i}",
                rel.label
            );
        }
    }
}

#[test]
fn improved_lollipop_relation_is_exact() {
    // relation (g): the annealer-found single-graph form {triple-dumbbell: 1/2}
    let config = EfpConfig::default();
    let events = generate_events(100, (2, 12), 100.0, 0.4, 43).unwrap();
    let rel = relation_catalog().into_iter().find(|r| r.label == 'g').unwrap();
    let improved = rel.improved_support.as_ref().unwrap();
    for (i, ev) in events.iter().enumerate() {
        let ev = rel.restriction.apply(ev, 2000 + i as u64).unwrap();
        let target = rel.target.evaluate(&ev, &config).unwrap();
        let fit: f64 = improved
            .iter()
            .map(|&(idx, coeff)| coeff * efp_value(&rel.basis[idx].graph, &ev, &config))
            .sum();
        let res = (target - fit).abs() / target.abs().max(1e-300);
        assert!(res < 1e-10, "improved (g) residual {res} on event {i}");
    }
}

#[test]
fn approximate_relations_fail_on_generic_events() {
    // generic = unrestricted, wider jets, M >= 4 so even the planar and
    // low-multiplicity rows are genuinely off their domain
    let config = EfpConfig::default();
    let events = generate_events(60, (4, 12), 100.0, 0.7, 44).unwrap();
    for rel in relation_catalog() {
        if !rel.approximate {
            continue;
        }
        let mut residuals: Vec<f64> =
            events.iter().map(|ev| relative_residual(&rel, ev, &config)).collect();
        residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = residuals[residuals.len() / 2];
        assert!(
            median > 1e-3,
            "relation ({}) median generic residual {median} too small",
            rel.label
        );
    }
}

#[test]
fn approximate_rows_mirror_their_exact_partners() {
    // (e,f), (g,h), (i,j), (k,l) share target and basis; only the
    // restriction differs
    let rels = relation_catalog();
    for (exact, approx) in [('e', 'f'), ('g', 'h'), ('i', 'j'), ('k', 'l')] {
        let e = rels.iter().find(|r| r.label == exact).unwrap();
        let a = rels.iter().find(|r| r.label == approx).unwrap();
        assert_eq!(e.target, a.target);
        assert_eq!(e.expected_support, a.expected_support);
        assert!(!e.approximate);
        assert!(a.approximate);
        assert_eq!(a.restriction, efpqubo_core::efp::Restriction::None);
    }
}
