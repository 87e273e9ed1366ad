//! 2-D discrete Fourier transforms over row-major grids.
//!
//! Conventions: the forward transform is unnormalized (DC equals the pixel
//! sum), the inverse carries the `1/(H*W)` factor. Arbitrary sizes are
//! supported; 1-D passes are planned by `rustfft`.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Row-major 2-D array.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "grid data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(Grid {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Grid {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn at_mut(&mut self, y: usize, x: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }
}

pub type Spectrum = Grid<Complex64>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> std::sync::Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

fn transform(grid: &mut Spectrum, direction: FftDirection) {
    let (h, w) = (grid.height, grid.width);
    let row_fft = plan(w, direction);
    for row in grid.data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = plan(h, direction);
    let mut column = vec![Complex64::default(); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = grid.data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            grid.data[y * w + x] = column[y];
        }
    }
}

/// Forward 2-D DFT of a real plane.
pub fn dft2(plane: &Grid<f64>) -> Spectrum {
    let mut spec = Grid {
        height: plane.height,
        width: plane.width,
        data: plane.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    };
    transform(&mut spec, FftDirection::Forward);
    spec
}

/// Inverse 2-D DFT, returning the full complex result.
pub fn idft2_complex(spectrum: &Spectrum) -> Spectrum {
    let mut out = spectrum.clone();
    transform(&mut out, FftDirection::Inverse);
    let scale = 1.0 / (out.height * out.width) as f64;
    for v in &mut out.data {
        *v *= scale;
    }
    out
}

/// Inverse 2-D DFT keeping the real part.
pub fn idft2(spectrum: &Spectrum) -> Grid<f64> {
    let c = idft2_complex(spectrum);
    Grid {
        height: c.height,
        width: c.width,
        data: c.data.into_iter().map(|v| v.re).collect(),
    }
}

fn roll<T: Clone>(grid: &Grid<T>, dy: usize, dx: usize) -> Grid<T> {
    let (h, w) = (grid.height, grid.width);
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        let sy = (y + h - dy % h) % h;
        for x in 0..w {
            let sx = (x + w - dx % w) % w;
            data.push(grid.data[sy * w + sx].clone());
        }
    }
    Grid {
        height: h,
        width: w,
        data,
    }
}

/// Moves the zero-frequency term to `(H/2, W/2)`.
pub fn fft_shift<T: Clone>(grid: &Grid<T>) -> Grid<T> {
    roll(grid, grid.height / 2, grid.width / 2)
}

/// Inverse of [`fft_shift`]; identical to it for even dimensions.
pub fn ifft_shift<T: Clone>(grid: &Grid<T>) -> Grid<T> {
    roll(grid, grid.height.div_ceil(2), grid.width.div_ceil(2))
}

/// Signed frequency index of bin `k` in an `n`-point DFT.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}
