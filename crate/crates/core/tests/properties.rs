//! Property suites: distribution identities, size ordering, algebraic
//! reductions and exact-versus-approximate ordering.

mod common;

const CASES: u32 = 96;

fn ok(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn t_squared_is_f_with_one_numerator_df() {
    ok(common::t_f_identity(CASES));
}

#[test]
fn quantiles_invert_cdfs() {
    ok(common::quantile_round_trips(CASES));
}

#[test]
fn normal_below_g1_below_g2() {
    ok(common::size_ordering(CASES));
}

#[test]
fn inflated_normal_root_bounds() {
    ok(common::quadratic_root_bounds(CASES));
}

#[test]
fn ldl_reconstructs_covariance() {
    ok(common::ldl_reconstruction(CASES));
}

#[test]
fn ancova_without_covariates_is_t_test() {
    ok(common::ancova_without_covariates(32));
}

#[test]
fn single_visit_mmrm_is_ancova() {
    ok(common::mmrm_single_visit(32));
}

#[test]
fn welch_equivalence_with_open_margin_is_one_tailed_welch() {
    ok(common::welch_one_sided_reduction(24));
}

#[test]
fn exact_equivalence_power_dominates_approximation() {
    ok(common::equivalence_exact_dominates(CASES));
}

#[test]
fn exact_ancova_equivalence_power_dominates_approximation() {
    ok(common::ancova_equivalence_exact_dominates(24));
}
