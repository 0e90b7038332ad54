pub mod fit;
pub mod pareto;
pub mod report;
pub mod simulate;
