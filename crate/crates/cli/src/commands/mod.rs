pub mod asymptotics;
pub mod distribution;
pub mod ed;
pub mod ising;
pub mod rank;
