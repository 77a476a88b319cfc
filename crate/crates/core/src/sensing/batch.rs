use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DeploymentDensity, NoiseModel};
use crate::field_model::FieldSpec;
use crate::rng::{Substream, TrialSeed};

/// Dithered one-bit comparator: `+1` if `y > t`, `-1` otherwise (ties give `-1`).
#[inline]
pub fn quantize_one(y: f64, t: f64) -> i8 {
    if y > t {
        1
    } else {
        -1
    }
}

/// One realisation of `n` sensors: locations, noisy samples, thresholds and bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorBatch {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub b: Vec<i8>,
    /// Dynamic range `c = a + b`.
    pub c: f64,
}

impl SensorBatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Writes `i,x,y,t,b` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,x,y,t,b")?;
        for i in 0..self.len() {
            writeln!(out, "{},{},{},{},{}", i, self.x[i], self.y[i], self.t[i], self.b[i])?;
        }
        Ok(())
    }
}

/// A single sample path of sensors that can be extended in place; the first
/// `n` sensors are the same whatever the final length.
pub struct SensorStream<'a> {
    field: &'a FieldSpec,
    deploy: &'a DeploymentDensity,
    noise: NoiseModel,
    locations: ChaCha8Rng,
    noises: ChaCha8Rng,
    thresholds: ChaCha8Rng,
    batch: SensorBatch,
}

impl<'a> SensorStream<'a> {
    pub fn new(field: &'a FieldSpec, deploy: &'a DeploymentDensity, noise: NoiseModel, seed: TrialSeed) -> Self {
        let c = field.amplitude() + noise.bound();
        Self {
            field,
            deploy,
            noise,
            locations: seed.stream(Substream::Locations),
            noises: seed.stream(Substream::Noise),
            thresholds: seed.stream(Substream::Thresholds),
            batch: SensorBatch {
                x: Vec::new(),
                y: Vec::new(),
                t: Vec::new(),
                b: Vec::new(),
                c,
            },
        }
    }

    /// Grows the path to `n` sensors (no-op if already that long).
    pub fn extend_to(&mut self, n: usize) -> &SensorBatch {
        let have = self.batch.len();
        if n > have {
            let extra = n - have;
            let c = self.batch.c;
            self.batch.x.reserve(extra);
            self.batch.y.reserve(extra);
            self.batch.t.reserve(extra);
            self.batch.b.reserve(extra);
            for _ in 0..extra {
                let x = self.deploy.sample(&mut self.locations);
                let z = self.noise.sample(&mut self.noises);
                let t = c * (2.0 * self.thresholds.random::<f64>() - 1.0);
                let y = self.field.eval(x) + z;
                self.batch.x.push(x);
                self.batch.y.push(y);
                self.batch.t.push(t);
                self.batch.b.push(quantize_one(y, t));
            }
        }
        &self.batch
    }

    pub fn batch(&self) -> &SensorBatch {
        &self.batch
    }

    pub fn into_batch(self) -> SensorBatch {
        self.batch
    }
}

/// Draws `n` sensors for the trial keyed by `seed`.
pub fn simulate_batch(
    field: &FieldSpec,
    deploy: &DeploymentDensity,
    noise: NoiseModel,
    n: usize,
    seed: TrialSeed,
) -> SensorBatch {
    let mut stream = SensorStream::new(field, deploy, noise, seed);
    stream.extend_to(n);
    stream.into_batch()
}
