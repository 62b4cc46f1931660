//! Items, capacity distributions, instance files, random generators and the
//! named fixture instances.

mod fixtures;
mod generate;
mod io;
mod model;

pub use fixtures::{make_fixture, FixtureId, SQRT5};
pub use generate::{generate_random, Family, GeneratorSpec};
pub use io::{load_instance, save_instance, LoadOptions};
pub use model::{CapacityDistribution, Instance, Item, Normalization, PROBABILITY_SUM_TOLERANCE};
