//! Problem definition: geometry, material, fractional parameters, supports and loads.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fracops::{FractionalOrder, Horizon};

/// Below this length-to-thickness ratio the Euler-Bernoulli assumption is suspect.
pub const SLENDER_RATIO: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    ClampedClamped,
    SimplySupported,
    Cantilever,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [
        BoundaryCondition::ClampedClamped,
        BoundaryCondition::SimplySupported,
        BoundaryCondition::Cantilever,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::ClampedClamped => "clamped",
            BoundaryCondition::SimplySupported => "simply-supported",
            BoundaryCondition::Cantilever => "cantilever",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clamped" | "clamped-clamped" | "c-c" | "cc" => Ok(BoundaryCondition::ClampedClamped),
            "simply-supported" | "ss" | "s-s" | "pinned" => Ok(BoundaryCondition::SimplySupported),
            "cantilever" | "cf" | "c-f" => Ok(BoundaryCondition::Cantilever),
            other => Err(Error::Unsupported(format!("unknown boundary condition '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadCase {
    /// Uniform transverse load per unit length.
    Udl { q0: f64 },
    /// Transverse point force at the free end.
    TipPoint { p: f64 },
    /// Forcing of the clamped-clamped manufactured field `L ξ³(1-ξ)³`.
    ManufacturedV1,
    /// Forcing of the simply-supported sextic manufactured field.
    ManufacturedV2,
    /// Uniform axial load per unit length.
    AxialUdl { f0: f64 },
}

impl LoadCase {
    pub fn name(&self) -> &'static str {
        match self {
            LoadCase::Udl { .. } => "udl",
            LoadCase::TipPoint { .. } => "tip",
            LoadCase::ManufacturedV1 => "v1",
            LoadCase::ManufacturedV2 => "v2",
            LoadCase::AxialUdl { .. } => "axial-udl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    pub alpha: FractionalOrder,
    /// Nominal half-width of the symmetric horizon.
    pub lf: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, lf: f64) -> Result<Self> {
        let alpha = FractionalOrder::new(alpha)?;
        if !(lf > 0.0) || !lf.is_finite() {
            return Err(Error::InvalidLength { name: "lf", value: lf });
        }
        Ok(FractionalParams { alpha, lf })
    }

    pub fn local() -> Self {
        FractionalParams { alpha: FractionalOrder::LOCAL, lf: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingRigidity {
    pub ea: f64,
    pub ei: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub length: f64,
    pub thickness: f64,
    pub width: f64,
    pub modulus: f64,
    pub bc: BoundaryCondition,
    pub load: LoadCase,
    pub frac: FractionalParams,
}

impl BeamSpec {
    pub fn new(
        length: f64,
        thickness: f64,
        width: f64,
        modulus: f64,
        bc: BoundaryCondition,
        load: LoadCase,
        frac: FractionalParams,
    ) -> Result<Self> {
        for (name, value) in [("L", length), ("h", thickness), ("b", width), ("E", modulus)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidLength { name, value });
            }
        }
        if frac.lf > length {
            return Err(Error::InvalidLength { name: "lf", value: frac.lf });
        }
        Ok(BeamSpec { length, thickness, width, modulus, bc, load, frac })
    }

    /// Slender beam of unit length, `L/h = 100`, unit width and `E = 30 GPa`.
    pub fn slender(bc: BoundaryCondition, load: LoadCase, frac: FractionalParams) -> Result<Self> {
        BeamSpec::new(1.0, 0.01, 1.0, 30e9, bc, load, frac)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.length / self.thickness
    }

    pub fn is_slender(&self) -> bool {
        self.aspect_ratio() >= SLENDER_RATIO
    }

    /// Horizon at `x`, truncated by the beam ends.
    pub fn resolve_horizon(&self, x: f64) -> Result<Horizon> {
        Horizon::truncated(x, self.frac.lf, self.length)
    }

    pub fn rigidity(&self) -> BendingRigidity {
        let (b, h, e) = (self.width, self.thickness, self.modulus);
        BendingRigidity { ea: e * b * h, ei: e * b * h.powi(3) / 12.0 }
    }

    pub fn with_frac(mut self, frac: FractionalParams) -> Result<Self> {
        if frac.lf > self.length {
            return Err(Error::InvalidLength { name: "lf", value: frac.lf });
        }
        self.frac = frac;
        Ok(self)
    }
}
