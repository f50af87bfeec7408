//! Built-in scenarios used by the `experiment` subcommand.

use std::path::Path;

use super::scenario::{parse_scenario, Scenario};
use super::HarnessError;
use crate::rational::{format_rational, Rational};

pub const STANDARD: &str = include_str!("../../scenarios/standard.toml");
pub const HALTING: &str = include_str!("../../scenarios/halting.toml");

pub fn standard() -> Result<Scenario, HarnessError> {
    parse_scenario(STANDARD, Path::new("."))
}

pub fn halting() -> Result<Scenario, HarnessError> {
    parse_scenario(HALTING, Path::new("."))
}

/// Diagonal family `chi_{n}` at threshold `p`. The control run leaves out
/// the reflection trader.
pub fn paradox_text(p: &Rational, control: bool) -> String {
    let p = format_rational(p);
    let mut text = format!(
        "name = \"paradox\"\nhorizon = 200\n\n[market]\nresolution = \"1/1024\"\n\n\
         [[reflective]]\nkind = \"diagonal\"\natom = \"chi_{{n}}\"\nthreshold = \"{p}\"\n\n"
    );
    if !control {
        text.push_str(&format!(
            "[[trader]]\nkind = \"reflection_diagonal\"\nname = \"diagonal\"\nfamily = \"chi_{{n}}\"\nthreshold = \"{p}\"\n\n"
        ));
    }
    text.push_str(&format!(
        "[experiment.paradox]\nfamily = \"chi_{{n}}\"\np = \"{p}\"\ncontrol = {control}\n"
    ));
    text
}

pub fn paradox(p: &Rational, control: bool) -> Result<Scenario, HarnessError> {
    parse_scenario(&paradox_text(p, control), Path::new("."))
}

/// Theorem stream proved at `n+5`, binned future prices settled after
/// `deferral(n)`, and a trader pricing the bins off today's price.
pub fn net_update_text(bins: u32, deferral: &str) -> String {
    format!(
        "name = \"net_update\"\nhorizon = 200\n\n[market]\nresolution = \"1/1024\"\n\n\
         [[deduction.stream]]\nfamily = \"t_{{n}}\"\ndelay = \"n+5\"\n\n\
         [[reflective]]\nkind = \"bins\"\nsentence = \"t_{{n}}\"\nprefix = \"nb\"\nbins = {bins}\nprice_day = \"{deferral}\"\n\n\
         [[trader]]\nkind = \"theorem_buyer\"\nname = \"theorems\"\nfamily = \"t_{{n}}\"\nlookback = 10\n\n\
         [[trader]]\nkind = \"expectation_bins\"\nname = \"bins\"\nsentence = \"t_{{n}}\"\nprefix = \"nb\"\nbins = {bins}\n\n\
         [experiment.net_update]\nfamily = \"t_{{n}}\"\nprefix = \"nb\"\nbins = {bins}\ndeferral = \"{deferral}\"\n"
    )
}

pub fn net_update(bins: u32, deferral: &str) -> Result<Scenario, HarnessError> {
    parse_scenario(&net_update_text(bins, deferral), Path::new("."))
}

/// Scenario an experiment runs on when none is given.
pub fn default_for(experiment: &str) -> Result<Scenario, HarnessError> {
    match experiment {
        "paradox" => paradox(&crate::rational::half(), false),
        "halting" => halting(),
        "net_update" => net_update(8, "n+10"),
        _ => standard(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn built_ins_parse() {
        assert_eq!(standard().unwrap().probes.track.len(), 10);
        assert_eq!(standard().unwrap().probes.pairs.len(), 5);
        halting().unwrap();
        assert_eq!(paradox(&ratio(1, 4), false).unwrap().config.pool.len(), 1);
        assert_eq!(paradox(&ratio(1, 4), true).unwrap().config.pool.len(), 0);
        assert_eq!(net_update(8, "n+10").unwrap().rules.len(), 8);
    }
}
