//! Simulation and measurement toolkit for preferential attachment in growing
//! networks.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] parses timestamped citation data into a cleaned corpus.
//! * [`timeline`] maps a corpus onto a nested growth sequence at a chosen
//!   time resolution.
//! * [`netsim`] generates synthetic growth sequences from the Price,
//!   Jeong, Callaway, Krapivsky and Redner growing-network models.
//! * [`rate`] measures attachment rates with Jeong's bi-epochal estimator
//!   and the corrected Newman estimator.
//! * [`distfit`] fits discretised log-normal, power-law and exponential
//!   forms to in-degree distributions.
//! * [`affit`] fits attachment functions to measured rates and scores
//!   their log-linearity.
//!
//! Numerical code is generic over the floating point type through the
//! [`Real`] trait. The `*64` aliases below fix it to `f64`, which is what the
//! command line tool and the acceptance tests use.

pub mod affit;
pub mod distfit;
pub mod error;
pub mod ingest;
pub mod netsim;
pub mod optim;
pub mod rate;
pub mod rng;
pub mod sampler;
pub mod timeline;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use error::{Error, Result};

/// Floating point scalar used by the numerical modules.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; every literal in the crate goes through here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type AttachmentFunction64 = netsim::AttachmentFunction<f64>;
pub type ModelConfig64 = netsim::ModelConfig<f64>;
pub type AttachmentRateEstimate64 = rate::AttachmentRateEstimate<f64>;
pub type BinnedRate64 = rate::BinnedRate<f64>;
pub type DistributionModel64 = distfit::DistributionModel<f64>;
pub type TailFit64 = distfit::TailFit<f64>;
pub type AttachmentFunctionFit64 = affit::AttachmentFunctionFit<f64>;
pub type LogLinearityScore64 = affit::LogLinearityScore<f64>;
pub type LogNormalFormCurve64 = distfit::LogNormalFormCurve<f64>;
