//! Finite, exact computations around Følner tilings of bounded-geometry
//! metric spaces, clopen castles of finite groupoid models, type-semigroup
//! searches and degree-zero uniformly finite homology.

pub mod amenability;
pub mod castle;
mod flow;
pub mod homology;
pub mod monoid;
pub mod rational;
pub mod selftest;
pub mod space;
pub mod tiling;

pub use rational::Rational;
pub use space::{FiniteMetricSpace, Point, SpaceError, WindowedSpace};
