use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn module_functions_round_trip() {
    Python::initialize();
    Python::attach(|py| -> PyResult<()> {
        let m = pyo3::wrap_pymodule!(exciton_trap_py::exciton_trap_py)(py);
        let m = m.bind(py);
        let kw = PyDict::new(py);
        kw.set_item("delta", 3f64.sqrt())?;
        let star = m.getattr("NetworkSpec")?.call(("star", 4, 4), Some(&kw))?;
        let chain = m.getattr("NetworkSpec")?.call(("chain", 4, 4), Some(&kw))?;
        assert_eq!(star.getattr("total_sites")?.extract::<usize>()?, 17);
        let a: f64 = m.getattr("absorption_time")?.call1((&star, 0.0))?.extract()?;
        let b: f64 = m.getattr("absorption_time")?.call1((&chain, 0.0))?.extract()?;
        assert!((a - b).abs() < 1e-6);
        let rates: (f64, f64, f64) = m.getattr("classical_rates")?.call1((1.0, 1.0, 0.0, 0.1))?.extract()?;
        assert!((rates.0 - 2.0).abs() < 1e-15);
        let err = m.getattr("absorption_time")?.call((&chain, 0.1, "reduced"), None).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let text: String = star.call_method0("to_config")?.extract()?;
        assert!(text.contains("kind = star"));
        Ok(())
    })
    .unwrap();
}
