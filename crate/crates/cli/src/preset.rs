//! Parameter sets of the four figures.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use mesoherald::{Resource, VarianceConvention};

use crate::config::{Conditioning, Cutoffs, DetectorConfig, ExperimentConfig, WignerSettings};
use crate::error::{CliError, Result};

pub const NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

fn base(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        resources: vec![Resource::SplitSqueezed],
        squeezing_db: 10.0,
        alpha_mag: 4.0,
        alpha_phases: vec![0.0],
        conditioning: Vec::new(),
        output: PathBuf::from("out").join(name),
        seed: 0,
        cutoffs: Cutoffs::default(),
        detector: None,
        wigner: WignerSettings::default(),
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut cfg = base(name);
    match name {
        // phase contrast: both resources, α = 4 and 4i, m = 24
        "fig2" => {
            cfg.resources = vec![Resource::SplitSqueezed, Resource::Epr];
            cfg.alpha_phases = vec![0.0, FRAC_PI_2];
            cfg.conditioning = vec![Conditioning::M(24)];
        }
        // parity and probability against the count; ψ_50 carries ~22 signal
        // photons, so the signal cutoff is raised for convergence
        "fig3" => {
            cfg.conditioning = vec![Conditioning::MRange([1, 50])];
            cfg.cutoffs.signal = 70;
            cfg.wigner.enabled = false;
        }
        "fig4" => {
            cfg.conditioning = [18, 22, 26, 36].into_iter().map(Conditioning::M).collect();
        }
        "fig5" => {
            cfg.conditioning = vec![Conditioning::PosteriorMode(25)];
            cfg.detector = Some(DetectorConfig {
                efficiency: 0.9,
                excess_noise: 1.1,
                mean_gain: 1.0,
                dark_sigma: 0.0,
                dv: mesoherald::detector::DEFAULT_DV,
                v_max: None,
                variance_convention: VarianceConvention::AsPrinted,
                monte_carlo_samples: 0,
            });
        }
        other => return Err(CliError::UnknownPreset(other.to_string())),
    }
    Ok(cfg)
}

/// Two-line gnuplot recipe for re-plotting a preset from its outputs.
pub fn plot_recipe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => {
            "set datafile separator ','; set size square; set palette defined (-1 'blue', 0 'white', 1 'red')\n\
             plot 'split_squeezed_phase0.0000/wigner_m24.csv' every ::1 using 1:2:3 with image  # repeat per source directory\n"
        }
        "fig3" => {
            "set datafile separator ','; set key autotitle columnhead\n\
             plot 'split_squeezed_phase0.0000/counts.csv' using 1:3 with linespoints, '' using 1:2 axes x1y2 with boxes\n"
        }
        "fig4" => {
            "set datafile separator ','; set size square; set palette defined (-1 'blue', 0 'white', 1 'red')\n\
             plot 'split_squeezed_phase0.0000/wigner_m18.csv' every ::1 using 1:2:3 with image  # also m22, m26, m36\n"
        }
        "fig5" => {
            "set datafile separator ','; set size square; set palette defined (-1 'blue', 0 'white', 1 'red')\n\
             plot 'split_squeezed_phase0.0000/wigner_mode25.csv' every ::1 using 1:2:3 with image\n"
        }
        _ => return None,
    })
}
