//! Binary PPM (P6) images of grain grids, one pixel per cell.

use thiserror::Error;

use crate::grid::{CellGrid, LatticePoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("no colour for value {value} at {at}")]
    UnknownValue { at: LatticePoint, value: i64 },
}

/// Colours for grain counts 0 to 3 and for cells outside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub grains: [[u8; 3]; 4],
    pub outside: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette { grains: [[0, 0, 96], [130, 180, 255], [255, 255, 0], [255, 0, 0]], outside: [255, 255, 255] }
    }
}

impl Palette {
    /// The colour of a cell value, `-1` meaning outside.
    pub fn color(&self, value: i64) -> Option<[u8; 3]> {
        match value {
            -1 => Some(self.outside),
            0..=3 => Some(self.grains[value as usize]),
            _ => None,
        }
    }
}

/// Renders `grid` with the top row of the image at the largest `y`. Cells
/// outside the mask are drawn as outside whatever they hold.
pub fn render_ppm(grid: &CellGrid<i64>, palette: &Palette) -> Result<Vec<u8>, RenderError> {
    let (w, h) = (grid.width(), grid.height());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            let i = row * w + col;
            let value = if grid.mask()[i] { grid.values()[i] } else { -1 };
            let rgb = palette.color(value).ok_or(RenderError::UnknownValue { at: grid.point(i), value })?;
            out.extend_from_slice(&rgb);
        }
    }
    Ok(out)
}
