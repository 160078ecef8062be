use crate::error::{Error, Result};

/// Number of ghost layers on every side.
pub const GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Transmissive,
    Periodic,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Transmissive => "transmissive",
            Boundary::Periodic => "periodic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "transmissive" => Some(Boundary::Transmissive),
            "periodic" => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

/// Uniform Cartesian grid in one or two space dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub space_dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub boundary: Boundary,
}

impl Grid {
    pub fn new_1d(nx: usize, x_range: (f64, f64), boundary: Boundary) -> Result<Self> {
        let g = Self {
            space_dim: 1,
            nx,
            ny: 1,
            x_range,
            y_range: (0.0, 1.0),
            boundary,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
        boundary: Boundary,
    ) -> Result<Self> {
        let g = Self {
            space_dim: 2,
            nx,
            ny,
            x_range,
            y_range,
            boundary,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid needs at least one cell per axis"));
        }
        if !(self.x_range.1 > self.x_range.0) || (self.space_dim == 2 && !(self.y_range.1 > self.y_range.0)) {
            return Err(Error::invalid("grid bounds must satisfy min < max"));
        }
        if self.space_dim == 1 && self.ny != 1 {
            return Err(Error::invalid("1D grid must have ny = 1"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.ny as f64
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_range.0 + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        if self.space_dim == 1 {
            0.0
        } else {
            self.y_range.0 + (j as f64 + 0.5) * self.dy()
        }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Cell volume (length in 1D).
    pub fn cell_volume(&self) -> f64 {
        if self.space_dim == 1 {
            self.dx()
        } else {
            self.dx() * self.dy()
        }
    }

    /// Same domain refined by an integer factor per axis.
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = self.clone();
        g.nx *= factor;
        if self.space_dim == 2 {
            g.ny *= factor;
        }
        g
    }
}

/// Mode coefficients of every conserved component on every interior cell.
///
/// Layout: `data[((j * nx + i) * components + c) * modes + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcField {
    pub nx: usize,
    pub ny: usize,
    pub components: usize,
    pub modes: usize,
    pub time: f64,
    pub data: Vec<f64>,
}

impl GpcField {
    pub fn zeros(grid: &Grid, components: usize, modes: usize) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            components,
            modes,
            time: 0.0,
            data: vec![0.0; grid.cells() * components * modes],
        }
    }

    pub fn stride(&self) -> usize {
        self.components * self.modes
    }

    /// All modes of all components in cell `(i, j)`.
    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let s = self.stride();
        let o = (j * self.nx + i) * s;
        &self.data[o..o + s]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = self.stride();
        let o = (j * self.nx + i) * s;
        &mut self.data[o..o + s]
    }

    /// Modes of component `c` in cell `(i, j)`.
    pub fn modes_of(&self, i: usize, j: usize, c: usize) -> &[f64] {
        let m = self.modes;
        &self.cell(i, j)[c * m..(c + 1) * m]
    }

    /// Sum of all cells of each (component, mode) pair.
    pub fn totals(&self) -> Vec<f64> {
        let s = self.stride();
        let mut out = vec![0.0; s];
        for cell in self.data.chunks(s) {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
