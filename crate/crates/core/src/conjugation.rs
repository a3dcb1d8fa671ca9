//! Numerical Legendre-Fenchel transforms over regular lattices.
//!
//! The conjugate of a table is the brute-force `max_v ⟨q, v⟩ − f(v)` over
//! its finite entries. It is a lower bound of the true conjugate, and exact
//! in the limit only where the maximizer lies well inside the lattice; the
//! boundary flag on [`ConjugateValue`] says when it does not.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::catalog::ConvexFunction;
use crate::error::{Error, Result};
use crate::point::{fmt_real, ExtReal, Point};
use crate::verify::{CheckReport, Status, Tolerances, WitnessLog};

/// Largest number of lattice points a grid may hold.
pub const MAX_GRID_POINTS: usize = 1_000_000;
pub const MAX_GRID_DIM: usize = 3;

/// A regular lattice `lo + (hi − lo) ⊙ i / (counts − 1)`, first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    lo: Point,
    hi: Point,
    counts: Vec<usize>,
}

impl SampleGrid {
    pub fn new(lo: Point, hi: Point, counts: Vec<usize>) -> Result<Self> {
        let n = lo.dim();
        if !(1..=MAX_GRID_DIM).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension {n} outside 1..={MAX_GRID_DIM}")));
        }
        hi.check_dim(n, "grid upper bound")?;
        if counts.len() != n {
            return Err(Error::dim("grid counts", n, counts.len()));
        }
        for i in 0..n {
            if !(lo[i] < hi[i]) {
                return Err(Error::InvalidGrid(format!("axis {i}: lo {} is not below hi {}", lo[i], hi[i])));
            }
            if counts[i] < 2 {
                return Err(Error::InvalidGrid(format!("axis {i}: need at least 2 points")));
            }
        }
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        match total {
            Some(t) if t <= MAX_GRID_POINTS => Ok(SampleGrid { lo, hi, counts }),
            _ => Err(Error::InvalidGrid(format!("more than {MAX_GRID_POINTS} points"))),
        }
    }

    /// A cube `[lo, hi]ⁿ` with `count` points per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        SampleGrid::new(Point::splat(dim, lo), Point::splat(dim, hi), vec![count; dim])
    }

    /// Parses `lo:hi:count` per axis, axes separated by `;`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut counts = Vec::new();
        for (axis, part) in s.split(';').enumerate() {
            let fields: Vec<&str> = part.trim().split(':').collect();
            let bad = || Error::Parse(format!("grid axis {axis}: expected lo:hi:count, got \"{part}\""));
            if fields.len() != 3 {
                return Err(bad());
            }
            lo.push(fields[0].trim().parse::<f64>().map_err(|_| bad())?);
            hi.push(fields[1].trim().parse::<f64>().map_err(|_| bad())?);
            counts.push(fields[2].trim().parse::<usize>().map_err(|_| bad())?);
        }
        SampleGrid::new(Point::new(lo)?, Point::new(hi)?, counts)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.counts[axis];
            flat /= self.counts[axis];
        }
        idx
    }

    fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + self.spacing(axis) * i as f64
        }
    }

    pub fn point(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        Point::from_iter_unchecked(idx.iter().enumerate().map(|(a, &i)| self.coordinate(a, i)))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// True when the lattice point sits on a face of the bounding box.
    pub fn on_boundary(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.counts)
            .any(|(&i, &c)| i == 0 || i + 1 == c)
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim() && (0..self.dim()).all(|a| x[a] >= self.lo[a] && x[a] <= self.hi[a])
    }
}

/// Function values on every lattice point of a grid.
#[derive(Clone, Debug)]
pub struct ValueTable {
    grid: SampleGrid,
    values: Vec<ExtReal>,
}

impl ValueTable {
    pub fn new(grid: SampleGrid, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dim("value table", grid.len(), values.len()));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::AllInfinite);
        }
        Ok(ValueTable { grid, values })
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    /// Smallest finite entry and its lattice index.
    pub fn min_entry(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.value().map(|v| (i, v)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Adds `c` to every finite entry.
    pub fn shifted(&self, c: f64) -> Result<ValueTable> {
        let values = self.values.iter().map(|v| v.add_real(c)).collect::<Result<Vec<_>>>()?;
        Ok(ValueTable {
            grid: self.grid.clone(),
            values,
        })
    }

    /// One row per lattice point: coordinates, then the value (`+inf` for
    /// infinite entries). A header row names the columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.grid.dim();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.point(i).iter().map(|c| fmt_real(*c)).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`ValueTable::write_csv`]. The rows must
    /// enumerate a regular lattice in the same order.
    pub fn read_csv<R: Read>(input: R) -> Result<ValueTable> {
        let rows = read_numeric_rows(input, "value table")?;
        let width = rows[0].len();
        if width < 2 {
            return Err(Error::Parse("value table rows need coordinates and a value".into()));
        }
        let n = width - 1;
        let coords: Vec<Vec<f64>> = rows.iter().map(|r| r[..n].to_vec()).collect();
        let grid = infer_lattice(&coords)?;
        for (i, c) in coords.iter().enumerate() {
            let p = grid.point(i);
            let tol = 1e-9 * (1.0 + p.norm());
            if c.iter().zip(p.iter()).any(|(a, b)| (a - b).abs() > tol) {
                return Err(Error::InvalidGrid(format!("row {} is out of lattice order", i + 1)));
            }
        }
        let values = rows.iter().map(|r| ExtReal::new(r[n])).collect::<Result<Vec<_>>>()?;
        ValueTable::new(grid, values)
    }
}

/// Parses CSV rows of reals, accepting `+inf`/`inf` and skipping a leading
/// header row. All rows must have the same width.
pub fn read_numeric_rows<R: Read>(input: R, what: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(parse_real).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if line == 0 => continue,
            Err(field) => {
                return Err(Error::Parse(format!("{what} line {}: not a number: \"{field}\"", line + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{what} has no data rows")));
    }
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Parse(format!("{what} row {} has {} fields, expected {width}", i + 1, rows[i].len())));
    }
    Ok(rows)
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    match s {
        "+inf" | "inf" | "+Infinity" | "Infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| s.to_string()),
    }
}

/// Recovers the grid behind a list of lattice coordinates.
pub(crate) fn infer_lattice(coords: &[Vec<f64>]) -> Result<SampleGrid> {
    let n = coords[0].len();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for axis in 0..n {
        let mut vals: Vec<f64> = coords.iter().map(|c| c[axis]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        lo.push(vals[0]);
        hi.push(*vals.last().unwrap());
        counts.push(vals.len());
    }
    let grid = SampleGrid::new(Point::new(lo)?, Point::new(hi)?, counts)?;
    if grid.len() != coords.len() {
        return Err(Error::InvalidGrid(format!(
            "{} rows do not form a {:?} lattice",
            coords.len(),
            grid.counts()
        )));
    }
    Ok(grid)
}

/// `values[i] = f(pointᵢ)`, evaluated in parallel.
pub fn tabulate(f: &ConvexFunction, grid: &SampleGrid) -> Result<ValueTable> {
    if f.dim() != grid.dim() {
        return Err(Error::dim("tabulation grid", f.dim(), grid.dim()));
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| f.evaluate(&grid.point(i)))
        .collect::<Result<Vec<_>>>()?;
    ValueTable::new(grid.clone(), values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateValue {
    pub value: f64,
    pub argmax: Point,
    /// The maximizing lattice point lies on the grid boundary, so the true
    /// supremum may be larger.
    pub on_boundary: bool,
}

/// The finite part of a table, flattened for repeated conjugate queries.
#[derive(Clone, Debug)]
pub struct TableConjugate {
    dim: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
    boundary: Vec<bool>,
}

impl TableConjugate {
    pub fn new(table: &ValueTable) -> Result<Self> {
        let grid = table.grid();
        let n = grid.dim();
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut boundary = Vec::new();
        for (i, v) in table.values().iter().enumerate() {
            if let Some(v) = v.value() {
                coords.extend_from_slice(&grid.point(i));
                values.push(v);
                boundary.push(grid.on_boundary(i));
            }
        }
        if values.is_empty() {
            return Err(Error::AllInfinite);
        }
        Ok(TableConjugate {
            dim: n,
            coords,
            values,
            boundary,
        })
    }

    pub fn eval(&self, q: &Point) -> Result<ConjugateValue> {
        q.check_dim(self.dim, "conjugate query")?;
        let n = self.dim;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (k, v) in self.values.iter().enumerate() {
            let c = &self.coords[k * n..(k + 1) * n];
            let s = c.iter().zip(q.iter()).map(|(a, b)| a * b).sum::<f64>() - v;
            // exact ties prefer an interior maximizer
            if s > best || (s == best && self.boundary[arg] && !self.boundary[k]) {
                best = s;
                arg = k;
            }
        }
        Ok(ConjugateValue {
            value: best,
            argmax: Point::from_iter_unchecked(self.coords[arg * n..(arg + 1) * n].iter().copied()),
            on_boundary: self.boundary[arg],
        })
    }
}

impl crate::prox_engine::ProxObjective for TableConjugate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, y: &Point) -> Result<ExtReal> {
        ExtReal::finite(self.eval(y)?.value)
    }

    /// The maximizer is a subgradient of the max of affine functions.
    fn shifted_subgradient(&self, y: &Point, shift: &Point) -> Result<Point> {
        Ok(&self.eval(y)?.argmax + shift)
    }
}

/// `max_v ⟨query, v⟩ − value(v)` over the finite entries of the table.
pub fn numerical_conjugate(table: &ValueTable, query: &Point) -> Result<f64> {
    Ok(numerical_conjugate_detail(table, query)?.value)
}

pub fn numerical_conjugate_detail(table: &ValueTable, query: &Point) -> Result<ConjugateValue> {
    TableConjugate::new(table)?.eval(query)
}

/// Compares the numerical conjugate of the tabulated envelope `f_λ` with
/// `f*(q) + (λ/2)‖q‖²` at each query. Queries where `f*` is infinite are
/// skipped and listed in the notes.
pub fn verify_envelope_conjugate(
    f: &ConvexFunction,
    lambda: f64,
    grid: &SampleGrid,
    queries: &[Point],
    tolerance: f64,
) -> Result<CheckReport> {
    let conj = f.conjugate_closed_form()?;
    let env = f.envelope(lambda)?;
    let table = tabulate(&env, grid)?;
    let engine = TableConjugate::new(&table)?;

    let rows = queries
        .par_iter()
        .map(|q| -> Result<Option<(f64, bool)>> {
            let exact = match conj.evaluate(q)?.value() {
                Some(v) => v + 0.5 * lambda * q.norm_sq(),
                None => return Ok(None),
            };
            let num = engine.eval(q)?;
            Ok(Some(((num.value - exact).abs(), num.on_boundary)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut log = WitnessLog::new();
    let mut gap: f64 = 0.0;
    let mut skipped = 0;
    let mut boundary = 0;
    for (q, row) in queries.iter().zip(&rows) {
        match row {
            None => skipped += 1,
            Some((g, on_b)) => {
                gap = gap.max(*g);
                boundary += usize::from(*on_b);
                if *g > tolerance {
                    log.push(q.clone(), format!("gap {}", fmt_real(*g)), *g);
                }
            }
        }
    }
    let mut report = CheckReport::new("envelope_conjugate", Tolerances::new(0.0, tolerance));
    report.conclusion_residual = gap;
    report.status = if gap <= tolerance { Status::Verified } else { Status::Counterexample };
    report.witnesses = log.into_witnesses();
    report.notes.push(format!("function: {f}, lambda {}", fmt_real(lambda)));
    if skipped > 0 {
        report.notes.push(format!("{skipped} queries outside dom f* skipped"));
    }
    if boundary > 0 {
        report.notes.push(format!("{boundary} queries had their argmax on the grid boundary"));
    }
    Ok(report)
}
