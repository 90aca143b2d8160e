use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CompensatedSum, GeoPoint};
use crate::error::{Error, Result};

/// Placement of a regular lat/lon grid. `xll`/`yll` are the lower-left
/// corner of the lower-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub xll: f64,
    pub yll: f64,
    pub cell_size: f64,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl GridGeometry {
    fn validate(&self) -> Result<()> {
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err(Error::Argument(format!(
                "cell size must be positive, got {}",
                self.cell_size
            )));
        }
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::Argument("grid must have at least one cell".into()));
        }
        if !self.xll.is_finite() || !self.yll.is_finite() {
            return Err(Error::Argument("non-finite grid origin".into()));
        }
        Ok(())
    }

    /// Row 0 is the northernmost row.
    pub fn cell_center(&self, row: usize, col: usize) -> GeoPoint {
        GeoPoint {
            lat: self.yll + (self.n_rows - row) as f64 * self.cell_size - self.cell_size / 2.0,
            lon: self.xll + col as f64 * self.cell_size + self.cell_size / 2.0,
        }
    }

    /// Cell containing `p`; cells are closed on their west/south edges.
    pub fn locate(&self, p: GeoPoint) -> Option<(usize, usize)> {
        let col = ((p.lon - self.xll) / self.cell_size).floor();
        let from_south = ((p.lat - self.yll) / self.cell_size).floor();
        if col < 0.0 || from_south < 0.0 {
            return None;
        }
        let (col, from_south) = (col as usize, from_south as usize);
        if col >= self.n_cols || from_south >= self.n_rows {
            return None;
        }
        Some((self.n_rows - 1 - from_south, col))
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridFormat {
    /// ESRI ASCII grid.
    AsciiGrid,
    /// `lat,lon,value` rows snapped onto the given geometry; values landing in
    /// the same cell are summed.
    Csv(GridGeometry),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub cells: usize,
    pub nodata_cells: usize,
    pub total: f64,
}

/// Regular grid of non-negative values (population counts or NTL radiance).
/// Nodata cells hold 0 and are masked out of means.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    geometry: GridGeometry,
    values: Vec<f64>,
    has_data: Vec<bool>,
    nodata_marker: Option<f64>,
}

impl PopulationGrid {
    /// Builds a grid from row-major values, north row first. Cells equal to
    /// `nodata_marker` are stored as 0 and masked.
    pub fn new(geometry: GridGeometry, values: Vec<f64>, nodata_marker: Option<f64>) -> Result<Self> {
        geometry.validate()?;
        if values.len() != geometry.len() {
            return Err(Error::Argument(format!(
                "expected {} values for a {}x{} grid, got {}",
                geometry.len(),
                geometry.n_rows,
                geometry.n_cols,
                values.len()
            )));
        }
        let mut grid = PopulationGrid {
            geometry,
            has_data: vec![true; values.len()],
            values,
            nodata_marker,
        };
        for i in 0..grid.values.len() {
            let v = grid.values[i];
            if Some(v) == nodata_marker {
                grid.values[i] = 0.0;
                grid.has_data[i] = false;
            } else if !v.is_finite() || v < 0.0 {
                let (r, c) = (i / geometry.n_cols, i % geometry.n_cols);
                return Err(Error::Argument(format!(
                    "cell (row {r}, col {c}) has invalid value {v}"
                )));
            }
        }
        Ok(grid)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn n_rows(&self) -> usize {
        self.geometry.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.geometry.n_cols
    }

    pub fn cell_size(&self) -> f64 {
        self.geometry.cell_size
    }

    pub fn origin(&self) -> GeoPoint {
        GeoPoint {
            lat: self.geometry.yll,
            lon: self.geometry.xll,
        }
    }

    pub fn nodata_marker(&self) -> Option<f64> {
        self.nodata_marker
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.geometry.n_cols + col]
    }

    pub fn has_data(&self, row: usize, col: usize) -> bool {
        self.has_data[row * self.geometry.n_cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value()
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            cells: self.values.len(),
            nodata_cells: self.has_data.iter().filter(|d| !**d).count(),
            total: self.total(),
        }
    }

    /// Sums each `factor`×`factor` block (starting at the north-west corner)
    /// into one cell. Blocks on the south and east edges may be partial.
    pub fn block_sum_downsample(&self, factor: usize) -> Result<PopulationGrid> {
        if factor < 1 {
            return Err(Error::Argument("downsample factor must be >= 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let g = &self.geometry;
        let out_rows = g.n_rows.div_ceil(factor);
        let out_cols = g.n_cols.div_ceil(factor);
        let cell_size = g.cell_size * factor as f64;
        let top = g.yll + g.n_rows as f64 * g.cell_size;
        let geometry = GridGeometry {
            xll: g.xll,
            yll: top - out_rows as f64 * cell_size,
            cell_size,
            n_rows: out_rows,
            n_cols: out_cols,
        };

        let mut values = Vec::with_capacity(out_rows * out_cols);
        let mut has_data = Vec::with_capacity(out_rows * out_cols);
        for br in 0..out_rows {
            for bc in 0..out_cols {
                let mut acc = CompensatedSum::default();
                let mut any = false;
                for r in br * factor..((br + 1) * factor).min(g.n_rows) {
                    for c in bc * factor..((bc + 1) * factor).min(g.n_cols) {
                        acc.add(self.get(r, c));
                        any |= self.has_data(r, c);
                    }
                }
                values.push(acc.value());
                has_data.push(any);
            }
        }
        Ok(PopulationGrid {
            geometry,
            values,
            has_data,
            nodata_marker: self.nodata_marker,
        })
    }

    /// Nearest-neighbour resampling onto `target`: each target cell takes the
    /// value of the source cell containing its center, or nodata when the
    /// center falls outside this grid.
    pub fn resample_nearest(&self, target: &GridGeometry) -> Result<PopulationGrid> {
        target.validate()?;
        let mut values = Vec::with_capacity(target.len());
        let mut has_data = Vec::with_capacity(target.len());
        for r in 0..target.n_rows {
            for c in 0..target.n_cols {
                match self.geometry.locate(target.cell_center(r, c)) {
                    Some((sr, sc)) => {
                        values.push(self.get(sr, sc));
                        has_data.push(self.has_data(sr, sc));
                    }
                    None => {
                        values.push(0.0);
                        has_data.push(false);
                    }
                }
            }
        }
        Ok(PopulationGrid {
            geometry: *target,
            values,
            has_data,
            nodata_marker: self.nodata_marker,
        })
    }
}

pub fn load_grid(path: impl AsRef<Path>, format: &GridFormat) -> Result<(PopulationGrid, GridSummary)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = path.display().to_string();
    let grid = match format {
        GridFormat::AsciiGrid => parse_ascii_grid(&text, &file)?,
        GridFormat::Csv(geometry) => parse_csv_grid(&text, &file, geometry)?,
    };
    let summary = grid.summary();
    Ok((grid, summary))
}

pub(crate) fn parse_ascii_grid(text: &str, file: &str) -> Result<PopulationGrid> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut centered = (false, false);
    let mut cell_size = None;
    let mut nodata = None;

    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(lineno, line)) = lines.peek() {
        let mut parts = line.split_whitespace();
        let Some(key) = parts.next() else {
            lines.next();
            continue;
        };
        if key.parse::<f64>().is_ok() {
            break;
        }
        let loc = format!("line {}", lineno + 1);
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(file, &loc, format!("header `{key}` has no value")))?;
        let num = value
            .parse::<f64>()
            .map_err(|_| Error::parse(file, &loc, format!("header `{key}` value `{value}` is not numeric")))?;
        let as_count = || -> Result<usize> {
            if num >= 1.0 && num.fract() == 0.0 {
                Ok(num as usize)
            } else {
                Err(Error::parse(file, &loc, format!("`{key}` must be a positive integer")))
            }
        };
        match key.to_ascii_lowercase().as_str() {
            "ncols" => ncols = Some(as_count()?),
            "nrows" => nrows = Some(as_count()?),
            "xllcorner" => xll = Some(num),
            "yllcorner" => yll = Some(num),
            "xllcenter" => {
                xll = Some(num);
                centered.0 = true;
            }
            "yllcenter" => {
                yll = Some(num);
                centered.1 = true;
            }
            "cellsize" => cell_size = Some(num),
            "nodata_value" => nodata = Some(num),
            _ => return Err(Error::parse(file, &loc, format!("unknown header key `{key}`"))),
        }
        lines.next();
    }

    let missing = |k: &str| Error::parse(file, "header", format!("missing `{k}`"));
    let n_cols = ncols.ok_or_else(|| missing("ncols"))?;
    let n_rows = nrows.ok_or_else(|| missing("nrows"))?;
    let cell_size = cell_size.ok_or_else(|| missing("cellsize"))?;
    let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
    if centered.0 {
        xll -= cell_size / 2.0;
    }
    if centered.1 {
        yll -= cell_size / 2.0;
    }

    let mut values = Vec::with_capacity(n_rows * n_cols);
    for (lineno, line) in lines {
        for tok in line.split_whitespace() {
            let idx = values.len();
            let (r, c) = (idx / n_cols, idx % n_cols);
            if r >= n_rows {
                return Err(Error::parse(
                    file,
                    format!("line {}", lineno + 1),
                    format!("more than {n_rows}x{n_cols} values"),
                ));
            }
            let v = tok.parse::<f64>().map_err(|_| {
                Error::parse(
                    file,
                    format!("line {}, row {r}, col {c}", lineno + 1),
                    format!("non-numeric cell `{tok}`"),
                )
            })?;
            if Some(v) != nodata && (!v.is_finite() || v < 0.0) {
                return Err(Error::parse(
                    file,
                    format!("line {}, row {r}, col {c}", lineno + 1),
                    format!("invalid cell value {v}"),
                ));
            }
            values.push(v);
        }
    }
    if values.len() != n_rows * n_cols {
        return Err(Error::parse(
            file,
            format!("row {}, col {}", values.len() / n_cols, values.len() % n_cols),
            format!(
                "dimension mismatch: header declares {n_rows}x{n_cols} = {} cells, found {}",
                n_rows * n_cols,
                values.len()
            ),
        ));
    }
    let geometry = GridGeometry {
        xll,
        yll,
        cell_size,
        n_rows,
        n_cols,
    };
    PopulationGrid::new(geometry, values, nodata).map_err(|e| Error::parse(file, "header", e.to_string()))
}

pub(crate) fn parse_csv_grid(text: &str, file: &str, geometry: &GridGeometry) -> Result<PopulationGrid> {
    geometry.validate()?;
    let mut values = vec![0.0; geometry.len()];
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(file, "header", e.to_string()))?
        .clone();
    if headers.len() != 3 || &headers[0] != "lat" || &headers[1] != "lon" {
        return Err(Error::parse(file, "header", "expected columns lat,lon,<value>"));
    }
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let loc = format!("row {row}");
        let rec = rec.map_err(|e| Error::parse(file, &loc, e.to_string()))?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(file, format!("row {row}, col {}", k + 1), "non-numeric field"))
        };
        let (lat, lon, v) = (field(0)?, field(1)?, field(2)?);
        if !v.is_finite() || v < 0.0 {
            return Err(Error::parse(file, &loc, format!("invalid value {v}")));
        }
        let p = GeoPoint::new(lat, lon).map_err(|e| Error::parse(file, &loc, e.to_string()))?;
        let (r, c) = geometry
            .locate(p)
            .ok_or_else(|| Error::parse(file, &loc, format!("point ({lat}, {lon}) outside declared grid")))?;
        values[r * geometry.n_cols + c] += v;
    }
    PopulationGrid::new(*geometry, values, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n_rows: usize, n_cols: usize) -> GridGeometry {
        GridGeometry {
            xll: 0.0,
            yll: 0.0,
            cell_size: 1.0,
            n_rows,
            n_cols,
        }
    }

    #[test]
    fn ascii_grid_of_ones() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 1\n1 1\n";
        let g = parse_ascii_grid(text, "t").unwrap();
        assert_eq!(g.total(), 4.0);
        assert_eq!(g.summary().nodata_cells, 0);
    }

    #[test]
    fn nodata_reads_as_zero() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n1 -9999\n2 3\n";
        let g = parse_ascii_grid(text, "t").unwrap();
        assert_eq!(g.total(), 6.0);
        assert_eq!(g.get(0, 1), 0.0);
        assert!(!g.has_data(0, 1));
        assert_eq!(g.summary().nodata_cells, 1);
    }

    #[test]
    fn ascii_grid_errors_carry_context() {
        let bad_cell = "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n";
        let msg = parse_ascii_grid(bad_cell, "t").unwrap_err().to_string();
        assert!(msg.contains("row 0, col 1"), "{msg}");

        let short = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 1 1\n";
        assert!(parse_ascii_grid(short, "t")
            .unwrap_err()
            .to_string()
            .contains("dimension mismatch"));

        let unknown = "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nbogus 3\n1 1\n";
        assert!(parse_ascii_grid(unknown, "t")
            .unwrap_err()
            .to_string()
            .contains("unknown header key"));
    }

    #[test]
    fn cell_centers_and_lookup_agree() {
        let g = geom(3, 4);
        for r in 0..3 {
            for c in 0..4 {
                assert_eq!(g.locate(g.cell_center(r, c)), Some((r, c)));
            }
        }
        assert_eq!(g.cell_center(0, 0), GeoPoint { lat: 2.5, lon: 0.5 });
        assert_eq!(g.locate(GeoPoint { lat: -0.1, lon: 0.5 }), None);
    }

    #[test]
    fn csv_rows_snap_and_sum() {
        let text = "lat,lon,pop\n0.5,0.5,10\n0.2,0.7,5\n1.5,1.5,2.5\n";
        let g = parse_csv_grid(text, "t", &geom(2, 2)).unwrap();
        assert_eq!(g.get(1, 0), 15.0);
        assert_eq!(g.get(0, 1), 2.5);
        assert_eq!(g.total(), 17.5);

        let outside = "lat,lon,pop\n5,5,1\n";
        assert!(parse_csv_grid(outside, "t", &geom(2, 2)).is_err());
    }

    #[test]
    fn downsample_block_of_ones() {
        let g = PopulationGrid::new(geom(2, 2), vec![1.0; 4], None).unwrap();
        let d = g.block_sum_downsample(2).unwrap();
        assert_eq!((d.n_rows(), d.n_cols()), (1, 1));
        assert_eq!(d.get(0, 0), 4.0);
        assert_eq!(g.block_sum_downsample(1).unwrap(), g);
        assert!(g.block_sum_downsample(0).is_err());
    }

    #[test]
    fn downsample_keeps_the_north_west_corner() {
        let g = PopulationGrid::new(geom(3, 3), (1..=9).map(f64::from).collect(), None).unwrap();
        let d = g.block_sum_downsample(2).unwrap();
        assert_eq!(d.values(), &[1.0 + 2.0 + 4.0 + 5.0, 3.0 + 6.0, 7.0 + 8.0, 9.0]);
        assert_eq!(d.geometry().yll, -1.0);
        assert_eq!(d.geometry().xll, 0.0);
        assert_eq!(d.total(), 45.0);
    }

    #[test]
    fn nearest_resample_aligns_coarse_onto_fine() {
        let coarse = GridGeometry {
            cell_size: 2.0,
            ..geom(1, 1)
        };
        let src = PopulationGrid::new(coarse, vec![7.0], None).unwrap();
        let out = src.resample_nearest(&geom(3, 3)).unwrap();
        // Fine centers at lat/lon 0.5 and 1.5 fall inside, 2.5 does not.
        assert_eq!(out.get(2, 0), 7.0);
        assert_eq!(out.get(1, 1), 7.0);
        assert!(!out.has_data(0, 0));
        assert!(!out.has_data(2, 2));
    }
}
