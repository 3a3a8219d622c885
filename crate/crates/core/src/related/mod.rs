//! Problems that share the acquisition-cost machinery: spending a fixed
//! budget, executing against an order book, and portfolio selection with
//! market impact.

pub mod budget;
pub mod lob;
pub mod markowitz;
