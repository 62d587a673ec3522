//! Self-learning Travelling Salesman Problem solver.
//!
//! A complete Euclidean TSP instance is turned into a tree-search problem:
//! an adapted single-player Monte Carlo tree search ranks candidate cities
//! with an A*-style score `f = g + h`, where the completion estimate `h`
//! comes from a graph-embedding value network trained by reinforcement
//! learning on self-generated episodes. Exact solvers (brute force,
//! Held-Karp) and classical heuristics (nearest neighbor, 2-opt) serve as
//! ground truth and baselines for optimality-ratio reporting.

pub mod cli;
pub mod instance;
pub mod mcts;
pub mod net;
pub mod oracles;
pub mod plot;
pub mod report;
pub mod trainer;
pub mod tsplib;

pub use instance::{PathState, Point, Tour, TspInstance};
pub use net::{AdamState, EmbeddingParams};
pub use oracles::SolveResult;
