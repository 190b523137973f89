//! Error type shared by every module.

use core::fmt;

/// Everything that can go wrong in the numerical pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Step size fell below `1e-14 * |t_end|`.
    StepSizeUnderflow { t: f64, h: f64 },
    /// Restart budget exhausted without realizing the target integrals.
    NotFound,
    /// Some of `B-C`, `C-A`, `A-B` vanish; use the degenerate balances.
    DegenerateInertia,
    /// Center of gravity at the fixed point; the lambda equation is void.
    AllZeroCenter,
    /// `mu = A x0 p0 + B y0 q0 + C z0 r0` vanishes.
    MuZero,
    /// Degenerate balances requested for `A != B`.
    NotDegenerate,
    /// Leading coefficient of the resonance polynomial vanishes.
    SingularLeading,
    /// `x1 == x2`, i.e. `q == 0`.
    CoincidentPoints,
    /// Two of the quintic's roots coincide.
    DegenerateQuintic,
    /// Continuation saw a phase jump larger than allowed at sample `index`.
    BranchJump { index: usize },
    /// The quartic does not have four real roots.
    NotFourRealRegime,
    /// `k1 > e1 > k2` fails.
    RealityWindowViolated,
    /// Separation variables outside the admissible windows.
    OutsideWindow,
    /// `L P1 + M P2 + N P3` is numerically zero.
    DegenerateDenominator,
    /// Quadrature refinement stalled.
    QuadratureNonConvergent,
    /// Theta series cannot converge (Im tau not positive definite).
    NotConvergent,
    /// A branch-point characteristic is not integral.
    NonIntegralCharacteristic { label: u8, roundoff: f64 },
    /// Constants outside `l1 > k > c0 > 0, l^2 < (3 l1 - k)/2`.
    RegimeViolated,
    /// `theta_5(v)` vanishes.
    ThetaZeroDenominator,
    /// `A1 = 2(B1 - C1)` fails.
    ConditionViolated,
    /// `B1 <= 2 C1`, so the mount offset would be imaginary or zero.
    NotRealizable,
    /// Malformed input (non-finite number, empty trajectory, ...).
    InvalidInput(&'static str),
}

/// Coarse classes used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Numerical,
    Regime,
    Input,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            NotFourRealRegime | RealityWindowViolated | OutsideWindow | RegimeViolated
            | ConditionViolated | NotRealizable | DegenerateInertia | AllZeroCenter
            | NotDegenerate | DegenerateQuintic => ErrorKind::Regime,
            InvalidInput(_) => ErrorKind::Input,
            _ => ErrorKind::Numerical,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Error::*;
        match self {
            StepSizeUnderflow { t, h } => write!(f, "step size underflow at t={t} (h={h:e})"),
            NotFound => write!(f, "no state realizes the requested integrals"),
            DegenerateInertia => write!(f, "degenerate inertia: some of B-C, C-A, A-B vanish"),
            AllZeroCenter => write!(f, "center of gravity at the fixed point"),
            MuZero => write!(f, "mu vanishes for this balance"),
            NotDegenerate => write!(f, "A != B, no degenerate balances"),
            SingularLeading => write!(f, "resonance polynomial has vanishing leading coefficient"),
            CoincidentPoints => write!(f, "x1 and x2 coincide (q = 0)"),
            DegenerateQuintic => write!(f, "quintic has repeated roots"),
            BranchJump { index } => write!(f, "branch jump at sample {index}"),
            NotFourRealRegime => write!(f, "quartic does not have four real roots"),
            RealityWindowViolated => write!(f, "k1 > e1 > k2 violated"),
            OutsideWindow => write!(f, "separation variables outside the admissible windows"),
            DegenerateDenominator => write!(f, "reconstruction denominator vanishes"),
            QuadratureNonConvergent => write!(f, "quadrature refinement stalled"),
            NotConvergent => write!(f, "theta series not convergent"),
            NonIntegralCharacteristic { label, roundoff } => {
                write!(f, "characteristic {label} not integral (roundoff {roundoff:e})")
            }
            RegimeViolated => write!(f, "constants outside l1 > k > c0 > 0, l^2 < (3 l1 - k)/2"),
            ThetaZeroDenominator => write!(f, "theta_5 vanishes"),
            ConditionViolated => write!(f, "A1 = 2(B1 - C1) violated"),
            NotRealizable => write!(f, "B1 <= 2 C1: no real mount offset"),
            InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}
