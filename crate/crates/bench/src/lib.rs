//! Benchmark inputs shared by the criterion targets.

use lagfib_core::{Complex64, MVPoly, Potential, Section};

/// `g = (i/2)(z₁² + z₂²) + z₁³/6` with section `f = z₁²/2 + z₁z₂/3`.
pub fn two_dim_problem() -> (Potential<Complex64>, Section<Complex64>) {
    let i_half = Complex64::new(0.0, 0.5);
    let g = MVPoly::from_terms(
        2,
        vec![
            (vec![2, 0], i_half),
            (vec![0, 2], i_half),
            (vec![3, 0], Complex64::new(1.0 / 6.0, 0.0)),
        ],
    )
    .expect("two variables");
    let f = MVPoly::from_terms(
        2,
        vec![
            (vec![2, 0], Complex64::new(0.5, 0.0)),
            (vec![1, 1], Complex64::new(1.0 / 3.0, 0.0)),
        ],
    )
    .expect("two variables");
    (Potential::new(g), Section::new(f))
}
