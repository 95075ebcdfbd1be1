use bwtunnel::potential::{BwParams, Kind};
use bwtunnel::resonance::{
    finite_eps_residuals, resonance_sets, LimitEquation, ResonanceSet, RootScan, SetLabel,
};
use bwtunnel::zerolimit::{classify, converge_study, Transparency};

const B: f64 = 3.0;

fn sets(kind: Kind, window: (f64, f64)) -> (ResonanceSet, ResonanceSet) {
    resonance_sets(kind, B, 1.0, window, RootScan::default()).unwrap()
}

#[test]
fn returned_roots_have_small_residuals() {
    for kind in [Kind::Plus, Kind::Minus] {
        let (model, prime) = sets(kind, (-40.0, 40.0));
        for (set, eq) in [(&model, LimitEquation::for_kind(kind)), (&prime, LimitEquation::Prime)] {
            for r in set.roots.iter().filter(|r| r.alpha != 0.0) {
                let f = eq.residual(r.alpha, B, 1.0).unwrap();
                assert!(f.abs() <= 1e-9, "{:?} {}: {f}", eq, r.alpha);
                assert!(r.residual.abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn model_sets_are_disjoint_from_prime() {
    for kind in [Kind::Plus, Kind::Minus] {
        let (model, prime) = sets(kind, (-40.0, 40.0));
        for a in model.alphas().into_iter().filter(|a| *a != 0.0) {
            for b in prime.alphas() {
                assert!((a - b).abs() > 1e-6, "{kind:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn prime_thetas_differ_from_one() {
    let (_, prime) = sets(Kind::Plus, (-40.0, 40.0));
    assert!(!prime.roots.is_empty());
    for r in &prime.roots {
        assert_eq!(r.set_label, SetLabel::SigmaPrime);
        let th = r.theta.unwrap();
        assert!((th - 1.0).abs() > 1e-6, "{}: theta {th}", r.alpha);
    }
}

#[test]
fn wider_window_finds_more_roots() {
    for kind in [Kind::Plus, Kind::Minus] {
        let (m1, p1) = sets(kind, (-40.0, 40.0));
        let (m2, p2) = resonance_sets(
            kind,
            B,
            1.0,
            (-80.0, 80.0),
            RootScan {
                grid_steps: 40_000,
                ..RootScan::default()
            },
        )
        .unwrap();
        assert!(m2.roots.len() > m1.roots.len(), "{kind:?}");
        assert!(p2.roots.len() > p1.roots.len(), "{kind:?}");
        for a in m1.alphas() {
            assert!(m2.alphas().iter().any(|b| (a - b).abs() < 1e-8));
        }
    }
}

#[test]
fn minus_set_indices_keep_published_labels() {
    let (minus, _) = sets(Kind::Minus, (-40.0, 40.0));
    let by_index = |n: i32| minus.roots.iter().find(|r| r.index == n).unwrap().alpha;
    assert!((by_index(-2) + 11.74).abs() < 0.01);
    assert!((by_index(-1) + 1.01).abs() < 0.01);
    assert!((by_index(1) - 8.77).abs() < 0.01);
    assert_eq!(by_index(0), 0.0);
}

#[test]
fn shared_condition_vanishes_on_prime_roots() {
    // eps * r9 tends to a multiple of f_prime as eps -> 0
    let (_, prime) = sets(Kind::Plus, (-40.0, 40.0));
    let scaled = |alpha: f64, eps: f64| {
        let p = BwParams::with_b(Kind::Plus, alpha, eps, B, 1.0).unwrap();
        let (_, r9, _) = finite_eps_residuals(&p, 1.0).unwrap();
        (r9 * eps).norm()
    };
    for r in &prime.roots {
        let coarse = scaled(r.alpha, 0.1);
        let fine = scaled(r.alpha, 0.001);
        assert!(fine < coarse, "{}: {coarse} -> {fine}", r.alpha);
        let generic = scaled(r.alpha + 1.0, 0.001);
        assert!(fine < 1e-2 * generic, "{}: {fine} vs {generic}", r.alpha);
    }
}

#[test]
fn partial_limit_matches_finite_eps_peak() {
    let (plus, prime) = sets(Kind::Plus, (-40.0, 40.0));
    let root = prime.nearest(26.87).unwrap().alpha;
    let c = classify(Kind::Plus, root, &plus, &prime, 1e-6).unwrap();
    let Transparency::PartialTransmission { t_limit, .. } = c.kind_label else {
        panic!("{c:?}");
    };
    let template = BwParams::with_b(Kind::Plus, 0.0, 0.1, B, 1.0).unwrap();
    let rows = converge_study(&template, root, 1.0, &[0.05, 0.02, 0.01], 0.5).unwrap();
    let last = rows.last().unwrap();
    assert!((last.t_peak - t_limit).abs() / t_limit < 0.02, "{} vs {t_limit}", last.t_peak);
}

#[test]
fn minus_prime_points_are_total() {
    let (minus, prime) = sets(Kind::Minus, (-40.0, 40.0));
    for r in &prime.roots {
        let c = classify(Kind::Minus, r.alpha, &minus, &prime, 1e-6).unwrap();
        assert!(
            matches!(c.kind_label, Transparency::TotalTransmission { .. }),
            "{c:?}"
        );
    }
}

#[test]
fn drift_shrinks_for_total_peak() {
    let template = BwParams::with_b(Kind::Plus, 0.0, 0.1, B, 1.0).unwrap();
    let (plus, _) = sets(Kind::Plus, (-40.0, 40.0));
    let root = plus.nearest(2.28).unwrap().alpha;
    let rows = converge_study(&template, root, 1.0, &[0.2, 0.1, 0.05, 0.02], 0.5).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].alpha_drift < w[0].alpha_drift, "{rows:?}");
    }
    for r in &rows {
        assert!(r.t_peak > 0.999);
    }
}

#[test]
fn plus_condition_vanishes_on_plus_root() {
    let (plus, _) = sets(Kind::Plus, (-40.0, 40.0));
    let root = plus.nearest(2.28).unwrap().alpha;
    let at = |eps: f64| {
        let p = BwParams::with_b(Kind::Plus, root, eps, B, 1.0).unwrap();
        let (r8, r9, r10) = finite_eps_residuals(&p, 1.0).unwrap();
        (r8.norm(), (r9 * eps).norm(), (r10 * eps).norm())
    };
    let rows: Vec<_> = [0.1, 0.01, 0.001].into_iter().map(at).collect();
    assert!(rows[2].0 < rows[1].0 && rows[1].0 < rows[0].0, "{rows:?}");
    assert!(rows[2].0 < 1e-3, "{rows:?}");
    for r in &rows {
        assert!(r.1 > 0.1 && r.2 > 0.1, "{rows:?}");
    }
}
