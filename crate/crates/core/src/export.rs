//! CSV output for plottable arrays.
//!
//! Comma separated, header row, LF line endings, 17 significant digits.

use std::io::{self, Write};

use crate::num::Real;
use crate::spectral::MomentumSpectrum;
use crate::variational::FamilyScan;

pub const SPECTRUM_HEADER: &str = "p,re,im,density,p2density";
pub const SCAN_HEADER: &str = "s,sigma_x,sigma_p,product_sigma_over_hbar_half,product_slit_over_pi_hbar";

fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64_lossy())
}

pub fn write_spectrum_csv<T: Real, W: Write>(spectrum: &MomentumSpectrum<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "{SPECTRUM_HEADER}")?;
    for (p, a) in spectrum.momenta().into_iter().zip(&spectrum.amplitudes) {
        let density = a.norm_sqr();
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt(p),
            fmt(a.re),
            fmt(a.im),
            fmt(density),
            fmt(p * p * density)
        )?;
    }
    Ok(())
}

pub fn write_scan_csv<T: Real, W: Write>(scan: &FamilyScan<T>, mut out: W) -> io::Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    let hbar = scan.units.hbar;
    for point in &scan.points {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt(point.s),
            fmt(point.sigma_x),
            fmt(point.sigma_p),
            fmt(point.product_sigma / (hbar * T::lit(0.5))),
            fmt(point.product_slit / (T::PI() * hbar))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use num_complex::Complex;

    use super::*;
    use crate::slit::Slit;
    use crate::spectral::MomentumGrid;
    use crate::wavefunction::PhysicalUnits;

    #[test]
    fn spectrum_rows() {
        let spectrum = MomentumSpectrum {
            grid: MomentumGrid::new(1.0_f64, 3).unwrap(),
            amplitudes: vec![Complex::new(0.5, 0.0), Complex::new(1.0, -1.0), Complex::new(0.5, 0.0)],
            units: PhysicalUnits::default(),
            source_slit: Slit::centered(1.0).unwrap(),
        };
        let mut buf = Vec::new();
        write_spectrum_csv(&spectrum, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SPECTRUM_HEADER);
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "0.0000000000000000e0,1.0000000000000000e0,-1.0000000000000000e0,2.0000000000000000e0,0.0000000000000000e0");
        assert!(!text.contains('\r'));
        let p: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(p, -1.0);
    }
}
