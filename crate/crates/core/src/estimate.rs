use num_complex::Complex;

/// Why an iterative estimator stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// The line search could not find an increase.
    Stagnated,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics<T> {
    pub iterations: usize,
    pub log_likelihood: Option<T>,
    /// Recoveries whose discriminant or radicand had to be clamped at zero.
    pub clamps: usize,
    pub termination: Option<Termination>,
    /// Objective value after each accepted iterate, starting with the initial point.
    pub history: Vec<T>,
}

/// Channel estimate for one array unit, `ĥ ∈ C^{N_f}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub h: Vec<Complex<T>>,
    pub diagnostics: Diagnostics<T>,
}

impl<T> Estimate<T> {
    pub fn new(h: Vec<Complex<T>>) -> Self
    where
        T: Default,
    {
        Self {
            h,
            diagnostics: Diagnostics {
                iterations: 0,
                log_likelihood: None,
                clamps: 0,
                termination: None,
                history: Vec::new(),
            },
        }
    }
}
