//! Shared fixtures for the criterion benchmarks.

use nived_core::assembly::{compute_all_cell_operators, CellOperators};
use nived_core::geometry::{build_nodal_cells, generate_unstructured_mesh, CellPartition};
use nived_core::{BackgroundMesh, DomainSpec, DualOptions, MaxentBasis, Prior};

/// An unstructured unit-square discretization with cell operators.
pub struct Fixture {
    pub mesh: BackgroundMesh,
    pub partition: CellPartition,
    pub basis: MaxentBasis,
    pub ops: Vec<CellOperators>,
}

impl Fixture {
    pub fn new(divisions: usize) -> Self {
        let mesh = generate_unstructured_mesh(&DomainSpec::unit_square(), divisions, 42).expect("mesh");
        let partition = build_nodal_cells(&mesh).expect("cells");
        let basis = MaxentBasis::new(
            mesh.nodes().to_vec(),
            partition.h_a.clone(),
            Prior::gaussian(Prior::DEFAULT_GAMMA),
            DualOptions::default(),
        )
        .expect("basis");
        let ops = compute_all_cell_operators(&partition, &basis).expect("operators");
        Self {
            mesh,
            partition,
            basis,
            ops,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.node_count()
    }
}
