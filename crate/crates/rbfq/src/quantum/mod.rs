//! Exact statevector simulation of the filtering-based quantum linear-system
//! pipeline: block encodings, schedule-driven adiabatic evolution, eigenstate
//! filtering, and solution-state preparation.

pub mod encode;
pub mod evolve;
pub mod filter;
pub mod pipeline;
pub mod schedule;
pub mod state;

pub use encode::{block_encode_h0, block_encode_h1, block_encode_projector, block_encode_sparse,
                 BlockEncoding};
pub use evolve::{aqc_evolve, AqcOutcome};
pub use filter::{apply_filter, eval_filter, FilterSpec};
pub use pipeline::{prepare_solution_state, qlsa_solve, QlsaOutcome, ResourceLedger};
pub use schedule::{schedule_f, ScheduleSpec};
pub use state::{fidelity, QuantumRegisterState, RegisterLayout};
