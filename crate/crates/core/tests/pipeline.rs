//! Round trips across modules: solver output feeds the graph builders and
//! counters, constructions feed the objective.

use approx::assert_abs_diff_eq;

use chromopt::graphs::g_alpha_clusters;
use chromopt::{
    build_g_alpha, classify_support, construct_counterexample, count_colorings_brute, count_colorings_dc,
    embed_counterexample, feasible, global_solve, log_rate, obj, q13_vector, support_graph, CandidateKind,
    SolveOptions, SupportClass,
};

#[test]
fn optimum_is_feasible_and_matches_its_support_shape() {
    for q in 2..=9u32 {
        for j in 1..=8 {
            let s = 1.0 + (q as f64 - 1.0) * j as f64 / 8.0;
            let rep = global_solve(q, s, SolveOptions::default()).unwrap();
            let v = rep.best.weight_vector();
            assert!(feasible(&v, s, 1e-9).unwrap().feasible, "q={q} s={s}");
            assert_abs_diff_eq!(obj(&v).unwrap(), rep.opt_value, epsilon = 1e-10);
            let class = classify_support(&support_graph(&v));
            match rep.best.candidate.kind {
                CandidateKind::P => assert!(matches!(class, SupportClass::Partition(_)), "q={q} s={s}: {class:?}"),
                CandidateKind::Q => assert!(matches!(class, SupportClass::NearPartition(_)), "q={q} s={s}: {class:?}"),
            }
        }
    }
}

#[test]
fn g_alpha_of_a_near_partition_is_counted_consistently() {
    let rep = global_solve(4, 2.5, SolveOptions::default()).unwrap();
    assert_eq!(rep.best.candidate.kind, CandidateKind::Q);
    let g = build_g_alpha(&rep.best.weight_vector(), 9).unwrap();
    let dc = count_colorings_dc(&g, 4).unwrap().count;
    let brute = count_colorings_brute(&g, 4).unwrap().count;
    assert_eq!(dc, brute);
}

#[test]
fn g_alpha_rates_settle_above_the_optimum() {
    let rep = global_solve(3, 2.0, SolveOptions::default()).unwrap();
    let v = rep.best.weight_vector();
    let rate = |n| {
        let parts: Vec<usize> = g_alpha_clusters(&v, n).unwrap().into_iter().map(|(_, c)| c).collect();
        log_rate(&parts, 3).unwrap()
    };
    let rates: Vec<f64> = [50, 100, 200, 400].into_iter().map(rate).collect();
    assert!(rates.iter().all(|&r| r > rep.opt_value));
    assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
    assert!(rates[3] - rep.opt_value < 0.01);
}

#[test]
fn family_vector_objective_equals_y() {
    for (s, t, r) in [(20, 2, 5), (40, 3, 17), (3400, 13, 1700)] {
        let rep = construct_counterexample(s, t, r).unwrap();
        let v = rep.weight_vector().unwrap();
        assert_abs_diff_eq!(obj(&v).unwrap(), rep.y, epsilon = 1e-9);
        assert!(feasible(&v, s as f64, 1e-9).unwrap().feasible);
    }
}

#[test]
fn smallest_embedding_is_the_thirteen_color_vector() {
    let v = embed_counterexample(10, 13).unwrap().unwrap();
    assert_abs_diff_eq!(obj(&v).unwrap(), obj(&q13_vector()).unwrap(), epsilon = 1e-12);
    let opt = global_solve(13, 10.0, SolveOptions::default()).unwrap().opt_value;
    assert_abs_diff_eq!(obj(&v).unwrap(), opt, epsilon = 1e-9);
}
