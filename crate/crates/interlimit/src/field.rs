//! Uniform-grid storage for scalar and staggered vector fields, with the
//! field exchange formats (flat CSV and a little-endian binary block).
//!
//! Grid convention: the domain is the square [0, L]² split into N×N cells of
//! width h = L/N. Scalar unknowns live either on nodes ((N+1)² points, used
//! by c, μ and Poisson solves), on cell centers (N², pressure), or on face
//! midpoints (velocity components of the staggered layout).

use crate::{InterlimitError, Result};
use std::io::{BufRead, Read, Write};
use std::path::Path;

/// Square N×N-cell grid on [0, L]².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Cells per direction.
    pub n: usize,
    /// Side length of the square domain.
    pub l: f64,
}

impl Grid {
    #[must_use]
    pub fn new(n: usize, l: f64) -> Self {
        assert!(n >= 2 && l > 0.0, "grid needs n ≥ 2 cells and positive length");
        Grid { n, l }
    }

    /// Cell width.
    #[must_use]
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Coordinate of node i (0 ≤ i ≤ N).
    #[must_use]
    pub fn node(&self, i: usize) -> f64 {
        self.h() * i as f64
    }

    /// Coordinate of cell center i (0 ≤ i < N).
    #[must_use]
    pub fn center(&self, i: usize) -> f64 {
        self.h() * (i as f64 + 0.5)
    }
}

/// Where the samples of a scalar field live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// (N+1)×(N+1) grid nodes, including the boundary.
    Node,
    /// N×N cell centers.
    Cell,
    /// (N+1)×N x-face midpoints (normal-x faces), u-component layout.
    FaceX,
    /// N×(N+1) y-face midpoints, v-component layout.
    FaceY,
}

impl Centering {
    /// (nx, ny) sample counts for a grid with N cells.
    #[must_use]
    pub fn dims(&self, n: usize) -> (usize, usize) {
        match self {
            Centering::Node => (n + 1, n + 1),
            Centering::Cell => (n, n),
            Centering::FaceX => (n + 1, n),
            Centering::FaceY => (n, n + 1),
        }
    }
}

/// Scalar field: `data[j*nx + i]` with i the x-index and j the y-index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub centering: Centering,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl ScalarField {
    /// Zero-initialized field with the given centering.
    #[must_use]
    pub fn zeros(grid: Grid, centering: Centering) -> Self {
        let (nx, ny) = centering.dims(grid.n);
        ScalarField { grid, centering, nx, ny, data: vec![0.0; nx * ny] }
    }

    /// Build from a function of physical coordinates.
    #[must_use]
    pub fn from_fn(grid: Grid, centering: Centering, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid, centering);
        let h = grid.h();
        let (ox, oy) = match centering {
            Centering::Node => (0.0, 0.0),
            Centering::Cell => (0.5, 0.5),
            Centering::FaceX => (0.0, 0.5),
            Centering::FaceY => (0.5, 0.0),
        };
        for j in 0..out.ny {
            for i in 0..out.nx {
                out.data[j * out.nx + i] = f((i as f64 + ox) * h, (j as f64 + oy) * h);
            }
        }
        out
    }

    /// Sample coordinates of entry (i, j).
    #[must_use]
    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.grid.h();
        let (ox, oy) = match self.centering {
            Centering::Node => (0.0, 0.0),
            Centering::Cell => (0.5, 0.5),
            Centering::FaceX => (0.0, 0.5),
            Centering::FaceY => (0.5, 0.0),
        };
        ((i as f64 + ox) * h, (j as f64 + oy) * h)
    }

    #[inline]
    #[must_use]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nx + i] = v;
    }

    /// Maximum absolute entry.
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at a physical point. Exact for functions that
    /// are affine in each coordinate; queries outside the sample rectangle
    /// are clamped onto it (constant extension past the outermost samples).
    #[must_use]
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let h = self.grid.h();
        let (ox, oy) = match self.centering {
            Centering::Node => (0.0, 0.0),
            Centering::Cell => (0.5, 0.5),
            Centering::FaceX => (0.0, 0.5),
            Centering::FaceY => (0.5, 0.0),
        };
        let u = (x / h - ox).clamp(0.0, (self.nx - 1) as f64);
        let v = (y / h - oy).clamp(0.0, (self.ny - 1) as f64);
        let i = (u as usize).min(self.nx - 2);
        let j = (v as usize).min(self.ny - 2);
        let fu = u - i as f64;
        let fv = v - j as f64;
        (1.0 - fv) * ((1.0 - fu) * self.at(i, j) + fu * self.at(i + 1, j))
            + fv * ((1.0 - fu) * self.at(i, j + 1) + fu * self.at(i + 1, j + 1))
    }

    /// Sum of entries times the quadrature cell area h² (midpoint rule for
    /// cell/face centering; trapezoid-weighted for node centering).
    #[must_use]
    pub fn integral(&self) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        match self.centering {
            Centering::Cell => self.data.iter().sum::<f64>() * h2,
            Centering::Node => {
                let mut s = 0.0;
                for j in 0..self.ny {
                    let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
                    for i in 0..self.nx {
                        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
                        s += wx * wy * self.at(i, j);
                    }
                }
                s * h2
            }
            // Face samples tile the domain with h² cells shifted half a cell;
            // the midpoint sum is the natural quadrature there too, with the
            // boundary faces carrying half cells in the normal direction.
            Centering::FaceX => {
                let mut s = 0.0;
                for j in 0..self.ny {
                    for i in 0..self.nx {
                        let w = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
                        s += w * self.at(i, j);
                    }
                }
                s * h2
            }
            Centering::FaceY => {
                let mut s = 0.0;
                for j in 0..self.ny {
                    let w = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
                    for i in 0..self.nx {
                        s += w * self.at(i, j);
                    }
                }
                s * h2
            }
        }
    }

    /// Export as flat CSV `i,j,value` (j outer loop).
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "i,j,value")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                writeln!(out, "{},{},{:.16e}", i, j, self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// Import the CSV written by [`ScalarField::to_csv`]; dims must match the
    /// provided grid/centering.
    pub fn from_csv(path: &Path, grid: Grid, centering: Centering) -> Result<Self> {
        let mut out = Self::zeros(grid, centering);
        let mut seen = vec![false; out.data.len()];
        let file = std::fs::File::open(path)?;
        for (ln, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if ln == 0 {
                if line.trim() != "i,j,value" {
                    return Err(InterlimitError::Io(format!(
                        "{}: bad field CSV header",
                        path.display()
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(InterlimitError::Io(format!(
                    "{}:{}: expected i,j,value",
                    path.display(),
                    ln + 1
                )));
            }
            let i: usize = cols[0].trim().parse().map_err(|e| {
                InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
            })?;
            let j: usize = cols[1].trim().parse().map_err(|e| {
                InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
            })?;
            let v: f64 = cols[2].trim().parse().map_err(|e| {
                InterlimitError::Io(format!("{}:{}: {}", path.display(), ln + 1, e))
            })?;
            if i >= out.nx || j >= out.ny {
                return Err(InterlimitError::Io(format!(
                    "{}:{}: index ({i},{j}) out of range {}x{}",
                    path.display(),
                    ln + 1,
                    out.nx,
                    out.ny
                )));
            }
            out.set(i, j, v);
            seen[j * out.nx + i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(InterlimitError::Io(format!(
                "{}: incomplete field (missing entries)",
                path.display()
            )));
        }
        Ok(out)
    }

    /// Export as the binary field block: magic `ILIMFB01`, then u32 nx, u32 ny
    /// (little-endian), then nx·ny f64 values row-major (j outer), all LE.
    pub fn to_binary(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(b"ILIMFB01")?;
        out.write_all(&(self.nx as u32).to_le_bytes())?;
        out.write_all(&(self.ny as u32).to_le_bytes())?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Import the binary block written by [`ScalarField::to_binary`].
    pub fn from_binary(path: &Path, grid: Grid, centering: Centering) -> Result<Self> {
        let mut file = std::fs::File::open(path)?;
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)?;
        if &magic != b"ILIMFB01" {
            return Err(InterlimitError::Io(format!(
                "{}: bad magic in binary field block",
                path.display()
            )));
        }
        let mut dims = [0u8; 8];
        file.read_exact(&mut dims)?;
        let nx = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
        let ny = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
        let mut out = Self::zeros(grid, centering);
        if nx != out.nx || ny != out.ny {
            return Err(InterlimitError::Io(format!(
                "{}: dims {}x{} do not match expected {}x{}",
                path.display(),
                nx,
                ny,
                out.nx,
                out.ny
            )));
        }
        let mut buf = vec![0u8; nx * ny * 8];
        file.read_exact(&mut buf)?;
        for (k, chunk) in buf.chunks_exact(8).enumerate() {
            out.data[k] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(out)
    }
}

/// Staggered (MAC) vector field: u on x-faces, v on y-faces.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl VectorField {
    #[must_use]
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            u: ScalarField::zeros(grid, Centering::FaceX),
            v: ScalarField::zeros(grid, Centering::FaceY),
        }
    }

    /// Build from component functions of physical coordinates.
    #[must_use]
    pub fn from_fn(
        grid: Grid,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        VectorField {
            u: ScalarField::from_fn(grid, Centering::FaceX, fu),
            v: ScalarField::from_fn(grid, Centering::FaceY, fv),
        }
    }

    #[must_use]
    pub fn grid(&self) -> Grid {
        self.u.grid
    }

    /// Maximum |component| over both layouts.
    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }

    /// Interpolate both components to a grid node (i, j), 0 ≤ i,j ≤ N:
    /// averages of the two adjacent faces in the transverse direction, with
    /// one-sided values on the boundary rows/columns.
    #[must_use]
    pub fn at_node(&self, i: usize, j: usize) -> (f64, f64) {
        let n = self.grid().n;
        // u lives at (i, j+1/2): average in j.
        let un = if j == 0 {
            1.5 * self.u.at(i, 0) - 0.5 * self.u.at(i, 1)
        } else if j == n {
            1.5 * self.u.at(i, n - 1) - 0.5 * self.u.at(i, n - 2)
        } else {
            0.5 * (self.u.at(i, j - 1) + self.u.at(i, j))
        };
        let vn = if i == 0 {
            1.5 * self.v.at(0, j) - 0.5 * self.v.at(1, j)
        } else if i == n {
            1.5 * self.v.at(n - 1, j) - 0.5 * self.v.at(n - 2, j)
        } else {
            0.5 * (self.v.at(i - 1, j) + self.v.at(i, j))
        };
        (un, vn)
    }
}
