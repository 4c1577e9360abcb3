use std::collections::BTreeMap;

use nalgebra::{Point2, Vector2};

use super::{AssemblyError, CsrMatrix};
use crate::geometry::BackgroundMesh;

/// Prescribed values for individual dofs (`2 * node + component`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fixes one dof. Re-fixing to the same value (within `1e-12` relative)
    /// is accepted; a different value is an error.
    pub fn fix(&mut self, dof: usize, value: f64) -> Result<(), AssemblyError> {
        if let Some(&existing) = self.values.get(&dof) {
            if (existing - value).abs() > 1e-12 * existing.abs().max(value.abs()).max(f64::MIN_POSITIVE) {
                return Err(AssemblyError::ConflictingConstraint {
                    dof,
                    existing,
                    requested: value,
                });
            }
            return Ok(());
        }
        self.values.insert(dof, value);
        Ok(())
    }

    /// Fixes the selected components (`[x, y]`) of every node on the given
    /// boundary tags to `field(node position)`.
    pub fn fix_tagged<F>(
        &mut self,
        mesh: &BackgroundMesh,
        tags: &[&str],
        components: [bool; 2],
        field: F,
    ) -> Result<(), AssemblyError>
    where
        F: Fn(&Point2<f64>) -> Vector2<f64>,
    {
        for tag in tags {
            for a in mesh.tagged_nodes(tag)? {
                let v = field(&mesh.nodes()[a]);
                for k in 0..2 {
                    if components[k] {
                        self.fix(2 * a + k, v[k])?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    pub fn dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    /// Same dofs with values replaced by `f(dof)`.
    pub fn with_values(&self, f: impl Fn(usize) -> f64) -> Self {
        Self {
            values: self.values.keys().map(|&d| (d, f(d))).collect(),
        }
    }
}

/// A linear system restricted to its free dofs.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each reduced dof.
    pub free: Vec<usize>,
    /// Full-length vector holding prescribed values (zero on free dofs).
    pub prescribed: Vec<f64>,
}

impl ReducedSystem {
    /// Full solution from the reduced one.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut u = self.prescribed.clone();
        for (&g, &v) in self.free.iter().zip(reduced) {
            u[g] = v;
        }
        u
    }
}

/// Eliminates constrained dofs: `K_ff u_f = f_f - K_fc u_c`.
pub fn apply_dirichlet(k: &CsrMatrix, f: &[f64], constraints: &Constraints) -> Result<ReducedSystem, AssemblyError> {
    let n = k.nrows();
    if f.len() != n {
        return Err(AssemblyError::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    let mut prescribed = vec![0.0; n];
    let mut fixed = vec![false; n];
    for (d, v) in constraints.iter() {
        if d >= n {
            return Err(AssemblyError::IndexOutOfRange { index: d, len: n });
        }
        prescribed[d] = v;
        fixed[d] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let kc = k.matvec(&prescribed);
    let rhs = free.iter().map(|&i| f[i] - kc[i]).collect();
    Ok(ReducedSystem {
        matrix: k.submatrix(&free),
        rhs,
        free,
        prescribed,
    })
}
