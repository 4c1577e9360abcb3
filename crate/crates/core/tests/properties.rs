mod common;

use common::*;

#[test]
fn maxent_values_reproduce_constants_and_linears() {
    run(MAXENT_CASES, maxent_point(0.0, 1.0), check_maxent_reproduction).unwrap();
}

#[test]
fn maxent_gradients_match_finite_differences() {
    run(MAXENT_CASES, maxent_point(0.01, 0.99), check_maxent_gradients).unwrap();
}

#[test]
fn cells_annihilate_rigid_motions_and_project_linears() {
    run(CELL_CASES, cell_case(), check_cell).unwrap();
}

#[test]
fn visco_tangent_matches_finite_differences() {
    run(VISCO_CASES, visco_case(), check_visco_tangent).unwrap();
}

#[test]
fn global_mass_conserves_total_mass() {
    run(MASS_CASES, mass_case(), check_mass).unwrap();
}

#[test]
fn newmark_conserves_energy_without_forces() {
    run(NEWMARK_CASES, newmark_case(), check_newmark_energy).unwrap();
}
