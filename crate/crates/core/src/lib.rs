pub mod cli;
pub mod expr;
pub mod flow;
pub mod lie;
pub mod model;
pub mod order;
pub mod sim;
