//! Analysis toolkit for the forced, damped cubic–quintic Duffing oscillator
//!
//! ```text
//! x'' - a x + b x^3 + c x^5 = eps (gamma cos(omega t) - delta x')
//! ```
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, with `*32` variants for `f32`.

pub mod chaos;
pub mod chebyshev;
pub mod elliptic;
pub mod error;
pub mod exact;
pub mod kbm;
pub mod melnikov;
pub mod odeint;
pub mod oscillator;
pub mod pyragas;
pub mod quad;
pub mod scalar;
pub mod sde;
pub mod trajectory;

pub use error::{Error, Result};
pub use oscillator::{
    energy, energy_report, equilibria, hamiltonian_fields, rhs, separatrix_velocity, EnergyReport,
    Equilibrium, EquilibriumKind,
};
pub use scalar::Real;

pub type Params = oscillator::OscillatorParams<f64>;
pub type Params32 = oscillator::OscillatorParams<f32>;
pub type State = oscillator::State<f64>;
pub type State32 = oscillator::State<f32>;
pub type Trajectory = trajectory::Trajectory<f64>;
pub type Trajectory32 = trajectory::Trajectory<f32>;
pub type StepControl = odeint::StepControl<f64>;
pub type CnSolution = exact::CnSolution<f64>;
pub type HomoclinicOrbit = exact::HomoclinicOrbit<f64>;
pub type HomoclinicOrbit32 = exact::HomoclinicOrbit<f32>;
pub type MelnikovResult = melnikov::MelnikovResult<f64>;
pub type KbmCoefficients = kbm::KbmCoefficients<f64>;
pub type KbmSolution = kbm::KbmSolution<f64>;
pub type PoincareSeries = chaos::PoincareSeries<f64>;
pub type ChaosScanRow = chaos::ChaosScanRow<f64>;
pub type ControllerConfig = pyragas::ControllerConfig<f64>;
pub type PeriodicityReport = pyragas::PeriodicityReport<f64>;
pub type SdeConfig = sde::SdeConfig<f64>;
pub type SdeConfig32 = sde::SdeConfig<f32>;
