//! Python bindings for the polylattice crate.

use pyo3::prelude::*;

#[pymodule]
fn polylattice_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
