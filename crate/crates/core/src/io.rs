//! On-disk formats: a little-endian binary container for spectral fields
//! and trajectories, plus plain CSV emitters for norm series, decay
//! exponent tables, and verification results.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! field file:       "SPCF" | version u32 | d u32 | n u64 | l f64
//!                   | field_count u32 | field_count * n^d * (re f64, im f64)
//! trajectory file:  "SPCT" | version u32 | d u32 | n u64 | l f64
//!                   | hash_len u32 | hash bytes (UTF-8)
//!                   | sample_count u64
//!                   | per sample: t f64, then d * n^d * (re f64, im f64)
//! ```
//!
//! Coefficients are row-major in the same index order the transforms use,
//! so a file written at one resolution reproduces the field bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::decay::DecayReport;
use crate::spaces::{NormSpec, Trajectory};
use crate::spectral::{GridSpec, SpectralField, VectorField};
use crate::verify::{BetaIntegralReport, InequalityCheck};
use crate::{Error, Result};

pub const FIELD_MAGIC: &[u8; 4] = b"SPCF";
pub const TRAJECTORY_MAGIC: &[u8; 4] = b"SPCT";
pub const FORMAT_VERSION: u32 = 1;

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn write_header(w: &mut impl Write, magic: &[u8; 4], grid: &GridSpec) -> Result<()> {
    w.write_all(magic)?;
    write_u32(w, FORMAT_VERSION)?;
    write_u32(w, grid.d() as u32)?;
    write_u64(w, grid.n() as u64)?;
    write_f64(w, grid.l())?;
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<GridSpec> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Serialization(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Serialization(format!(
            "unsupported format version {version}, this build reads {FORMAT_VERSION}"
        )));
    }
    let d = read_u32(r)? as usize;
    let n = read_u64(r)? as usize;
    let l = read_f64(r)?;
    GridSpec::new(d, n, l)
}

fn write_coeffs(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    let mut buf = Vec::with_capacity(f.coeffs().len() * 16);
    for c in f.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_coeffs(r: &mut impl Read, grid: GridSpec) -> Result<SpectralField> {
    let mut buf = vec![0u8; grid.len() * 16];
    r.read_exact(&mut buf)?;
    let coeffs: Vec<Complex64> = buf
        .chunks_exact(16)
        .map(|ch| {
            Complex64::new(
                f64::from_le_bytes(ch[0..8].try_into().expect("chunk size")),
                f64::from_le_bytes(ch[8..16].try_into().expect("chunk size")),
            )
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

pub fn write_scalar_field(path: impl AsRef<Path>, f: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, FIELD_MAGIC, f.grid())?;
    write_u32(&mut w, 1)?;
    write_coeffs(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn write_vector_field(path: impl AsRef<Path>, u: &VectorField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, FIELD_MAGIC, u.grid())?;
    write_u32(&mut w, u.components().len() as u32)?;
    for c in u.components() {
        write_coeffs(&mut w, c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scalar_field(path: impl AsRef<Path>) -> Result<SpectralField> {
    let mut r = BufReader::new(File::open(path)?);
    let grid = read_header(&mut r, FIELD_MAGIC)?;
    let count = read_u32(&mut r)?;
    if count != 1 {
        return Err(Error::Serialization(format!(
            "expected a scalar field, file holds {count} components"
        )));
    }
    read_coeffs(&mut r, grid)
}

pub fn read_vector_field(path: impl AsRef<Path>) -> Result<VectorField> {
    let mut r = BufReader::new(File::open(path)?);
    let grid = read_header(&mut r, FIELD_MAGIC)?;
    let count = read_u32(&mut r)? as usize;
    if count != grid.d() {
        return Err(Error::Serialization(format!(
            "vector field over d = {} grid needs {} components, file holds {count}",
            grid.d(),
            grid.d()
        )));
    }
    let components = (0..count)
        .map(|_| read_coeffs(&mut r, grid))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(components)
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, TRAJECTORY_MAGIC, traj.grid())?;
    let hash = traj.config_hash().unwrap_or("");
    write_u32(&mut w, hash.len() as u32)?;
    w.write_all(hash.as_bytes())?;
    write_u64(&mut w, traj.len() as u64)?;
    for (t, u) in traj.iter() {
        write_f64(&mut w, t)?;
        for c in u.components() {
            write_coeffs(&mut w, c)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let mut r = BufReader::new(File::open(path)?);
    let grid = read_header(&mut r, TRAJECTORY_MAGIC)?;
    let hash_len = read_u32(&mut r)? as usize;
    let mut hash_bytes = vec![0u8; hash_len];
    r.read_exact(&mut hash_bytes)?;
    let hash = String::from_utf8(hash_bytes)
        .map_err(|e| Error::Serialization(format!("config hash is not UTF-8: {e}")))?;
    let count = read_u64(&mut r)? as usize;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let t = read_f64(&mut r)?;
        let components = (0..grid.d())
            .map(|_| read_coeffs(&mut r, grid))
            .collect::<Result<Vec<_>>>()?;
        samples.push((t, VectorField::from_components(components)?));
    }
    let traj = Trajectory::new(samples)?;
    Ok(if hash.is_empty() {
        traj
    } else {
        traj.with_config_hash(hash)
    })
}

/// Norm history of one monitored quantity: rows are
/// `(t, raw_norm, rescaled_norm)` as produced by the rescaled series.
pub fn write_norm_series_csv(
    path: impl AsRef<Path>,
    rows: &[(f64, f64, f64)],
    spec: &NormSpec,
    derivative_order: usize,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,raw_norm,rescaled_norm,s,q,n")?;
    for &(t, raw, rescaled) in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{},{}",
            t, raw, rescaled, spec.s, spec.q, derivative_order
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_exponent_table_csv(path: impl AsRef<Path>, reports: &[DecayReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "field,s,q,n,theoretical,fitted,amplitude,r_squared,trend,window_lo,window_hi,sample_count,degenerate,pass"
    )?;
    for rep in reports {
        writeln!(
            w,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{}",
            rep.spec.label(),
            rep.spec.s,
            rep.spec.q,
            rep.spec.n,
            rep.theoretical,
            rep.fitted,
            rep.amplitude,
            rep.r_squared,
            rep.trend,
            rep.window.0,
            rep.window.1,
            rep.sample_count,
            rep.degenerate,
            rep.pass
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_checks_csv(path: impl AsRef<Path>, checks: &[InequalityCheck]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "name,params,sample_count,worst_ratio,fitted_c,refinement_stability,verdict"
    )?;
    for c in checks {
        writeln!(
            w,
            "{},\"{}\",{},{:.16e},{:.16e},{:.16e},{}",
            c.name,
            c.params,
            c.sample_count,
            c.worst_ratio,
            c.fitted_c,
            c.refinement_stability,
            c.verdict
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_beta_csv(path: impl AsRef<Path>, battery: &[BetaIntegralReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "gamma,theta,lower,upper,scaling_defect")?;
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
    for row in battery {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.gamma,
            row.theta,
            cell(row.lower),
            cell(row.upper),
            cell(row.scaling_defect)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_initial_data;
    use crate::spectral::InitialData;
    use crate::verify::{beta_integral_battery, run_check, CheckKind};

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn sample_velocity(n: usize, seed: u64) -> VectorField {
        let grid = GridSpec::new(2, n, TAU).unwrap();
        make_initial_data(
            grid,
            &InitialData::RandomSlope {
                amplitude: 0.1,
                beta: 1.5,
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn scalar_field_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.spcf");
        let grid = GridSpec::new(3, 8, 1.7).unwrap();
        let f = SpectralField::from_fn(grid, |x| (x[0] * 3.0).sin() + (x[1] - x[2]).cos());
        write_scalar_field(&path, &f).unwrap();
        let g = read_scalar_field(&path).unwrap();
        assert_eq!(f, g);
        assert!(read_vector_field(&path).is_err());
    }

    #[test]
    fn vector_field_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.spcf");
        let u = sample_velocity(16, 7);
        write_vector_field(&path, &u).unwrap();
        let v = read_vector_field(&path).unwrap();
        assert_eq!(u, v);
        assert!(read_scalar_field(&path).is_err());
    }

    #[test]
    fn trajectory_round_trips_with_hash() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.spct");
        let u0 = sample_velocity(8, 3);
        let mut u1 = u0.clone();
        u1.scale(0.5);
        let traj = Trajectory::new(vec![(0.0, u0), (0.25, u1)])
            .unwrap()
            .with_config_hash("abc123");
        write_trajectory(&path, &traj).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back.config_hash(), Some("abc123"));
        assert_eq!(back.len(), 2);
        assert_eq!(back.times(), traj.times());
        for i in 0..traj.len() {
            assert_eq!(traj.sample(i).1, back.sample(i).1);
        }
    }

    #[test]
    fn trajectory_without_hash_reads_back_none() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.spct");
        let u0 = sample_velocity(8, 5);
        let traj = Trajectory::new(vec![(0.0, u0)]).unwrap();
        write_trajectory(&path, &traj).unwrap();
        assert_eq!(read_trajectory(&path).unwrap().config_hash(), None);
    }

    #[test]
    fn corrupt_magic_and_version_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.spcf");
        let grid = GridSpec::new(2, 8, TAU).unwrap();
        let f = SpectralField::from_fn(grid, |x| x[0].cos());
        write_scalar_field(&path, &f).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_scalar_field(&path),
            Err(Error::Serialization(_))
        ));
        write_scalar_field(&path, &f).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_scalar_field(&path),
            Err(Error::Serialization(_))
        ));
        // truncation surfaces as an I/O error
        write_scalar_field(&path, &f).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(read_scalar_field(&path), Err(Error::Io(_))));
    }

    #[test]
    fn csv_emitters_produce_expected_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let series = dir.path().join("series.csv");
        let spec = NormSpec::new(1.0, 2.0).unwrap();
        write_norm_series_csv(&series, &[(0.1, 2.0, 0.2), (0.2, 1.0, 0.3)], &spec, 1).unwrap();
        let text = std::fs::read_to_string(&series).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,raw_norm,rescaled_norm,s,q,n");
        assert!(lines[1].ends_with(",1,2,1"));
        assert!(lines[1].starts_with("1.0000000000000001e-1,"));

        let checks = dir.path().join("checks.csv");
        let grid = GridSpec::new(2, 32, TAU).unwrap();
        let check = run_check(&CheckKind::RieszBound { q: 2.0 }, &grid).unwrap();
        write_checks_csv(&checks, &[check]).unwrap();
        let text = std::fs::read_to_string(&checks).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("riesz_bound"));
        assert!(text.contains(",true"));

        let beta = dir.path().join("beta.csv");
        write_beta_csv(&beta, &beta_integral_battery()).unwrap();
        let text = std::fs::read_to_string(&beta).unwrap();
        assert_eq!(text.lines().count(), 8);
        // the pair with a divergent lower half leaves its cell empty
        assert!(text.lines().any(|l| l.starts_with("0.5,1.25,,")));
    }

    #[test]
    fn exponent_table_lists_one_row_per_report() {
        use crate::decay::{decay_report, ExponentSpec};
        use crate::solver::{integrate, SolverConfig};
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let u0 = make_initial_data(grid, &InitialData::TaylorGreen { amplitude: 1.0 }).unwrap();
        let traj = integrate(&u0, &SolverConfig::new(1.0, 32)).unwrap();
        let specs = [
            ExponentSpec::velocity(0.0, 2.0, 0),
            ExponentSpec::pressure(0.0, 2.0),
        ];
        let reports: Vec<_> = specs
            .iter()
            .map(|s| decay_report(&traj, s, None).unwrap())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exponents.csv");
        write_exponent_table_csv(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("velocity_s0_q2_n0,"));
        assert!(lines[2].starts_with("pressure_s0_q2,"));
        for l in &lines[1..] {
            assert!(l.ends_with(",false,true"), "row should pass: {l}");
        }
    }
}
