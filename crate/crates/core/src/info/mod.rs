//! Classical information measures on discretized input/output records.

pub mod discrete;
pub mod pid;

pub use discrete::{
    co_information, discretize, equal_width_edges, joint_histogram, joint_histogram_with_dims, mutual_information,
    BinStrategy, DiscreteJoint, Discretized, Target,
};
pub use pid::{
    broja_optimize, broja_pid, gate, gate_reference, validate_gates, BrojaSolution, GateCheck, PIDResult, PidOptions,
    GATES,
};
