use qscramble::check::{self, CheckRow};

fn report(row: CheckRow) {
    println!("{row}");
    assert!(row.pass, "criterion {} failed: {}", row.id, row.detail);
}

#[test]
fn criterion_01_trade_off_identity() {
    report(check::trade_off_identity());
}

#[test]
fn criterion_02_determinant_identity() {
    report(check::determinant_identity());
}

#[test]
fn criterion_03_quantumness() {
    report(check::quantumness());
}

#[test]
fn criterion_04_optimum() {
    report(check::optimum_reproduction());
}

#[test]
fn criterion_05_bound_chain() {
    report(check::hierarchy_chain());
}

#[test]
fn criterion_06_sequential_bounds() {
    report(check::sequential_bounds());
}

#[test]
fn criterion_07_route_equivalence() {
    report(check::route_equivalence());
}

#[test]
fn criterion_08_landscape_gradient() {
    report(check::landscape_gradient());
}

#[test]
fn criterion_09_numerical_nagaoka() {
    report(check::numerical_nagaoka());
}

#[test]
fn criterion_10_monte_carlo_saturation() {
    report(check::monte_carlo_saturation());
}

#[test]
fn criterion_11_sloppy_limit() {
    report(check::sloppy_limit());
}
