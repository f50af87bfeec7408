//! File formats: price traces, certificates, exploitation reports.

use std::io::{Read, Write};

use num_bigint::BigInt;

use super::HarnessError;
use crate::inductor::{DayCertificate, MarketTrace};
use crate::logic::parse_sentence;
use crate::pricing::Pricing;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::trading::ExploitationReport;

pub const TRACE_HEADER: &str = "day,sentence,price_num,price_den";

fn format_err(line: u64, message: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        line,
        message: message.into(),
    }
}

/// One row per (day, priced sentence), sentences in canonical order.
pub fn write_trace<W: Write>(mut out: W, pricings: &[Pricing]) -> Result<(), HarnessError> {
    let mut text = String::from(TRACE_HEADER);
    text.push('\n');
    for (i, p) in pricings.iter().enumerate() {
        for (s, price) in p.iter() {
            text.push_str(&format!(
                "{},\"{}\",{},{}\n",
                i + 1,
                s.render().replace('"', "\"\""),
                price.numer(),
                price.denom()
            ));
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<Pricing>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRACE_HEADER {
        return Err(format_err(1, format!("expected header `{TRACE_HEADER}`")));
    }
    let mut pricings: Vec<Pricing> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(format_err(line, "expected 4 fields"));
        }
        let day: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| format_err(line, format!("bad day `{}`", &record[0])))?;
        if day == 0 || day < pricings.len() {
            return Err(format_err(line, "days must be positive and nondecreasing"));
        }
        let s = parse_sentence(&record[1]).map_err(|e| format_err(line, e.to_string()))?;
        let num: BigInt = record[2]
            .trim()
            .parse()
            .map_err(|_| format_err(line, "bad numerator"))?;
        let den: BigInt = record[3]
            .trim()
            .parse()
            .map_err(|_| format_err(line, "bad denominator"))?;
        if den == BigInt::from(0) {
            return Err(format_err(line, "zero denominator"));
        }
        while pricings.len() < day {
            pricings.push(Pricing::new());
        }
        let p = &mut pricings[day - 1];
        if p.contains(&s) {
            return Err(format_err(line, format!("`{s}` priced twice on day {day}")));
        }
        p.set(s, Rational::new(num, den));
    }
    Ok(pricings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub day: u64,
    pub epsilon: Rational,
    pub max_value: Rational,
    pub scales: Vec<Rational>,
}

impl From<&DayCertificate> for CertificateRow {
    fn from(c: &DayCertificate) -> Self {
        CertificateRow {
            day: c.day,
            epsilon: c.epsilon.clone(),
            max_value: c.max_value.clone(),
            scales: c.scales.clone(),
        }
    }
}

pub fn write_certificates<W: Write>(
    out: W,
    certificates: &[DayCertificate],
    member_names: &[String],
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["day".to_string(), "epsilon".into(), "max_value".into()];
    header.extend(member_names.iter().map(|n| format!("scale_{n}")));
    w.write_record(&header)?;
    for c in certificates {
        let mut row = vec![
            c.day.to_string(),
            format_rational(&c.epsilon),
            format_rational(&c.max_value),
        ];
        row.extend(c.scales.iter().map(format_rational));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_certificates<R: Read>(input: R) -> Result<Vec<CertificateRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.len() < 3 || &header[0] != "day" || &header[1] != "epsilon" || &header[2] != "max_value" {
        return Err(format_err(1, "expected header `day,epsilon,max_value,scale_...`"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let rat = |i: usize| parse_rational(&record[i]).map_err(|e| format_err(line, e.to_string()));
        rows.push(CertificateRow {
            day: record[0].parse().map_err(|_| format_err(line, "bad day"))?,
            epsilon: rat(1)?,
            max_value: rat(2)?,
            scales: (3..record.len()).map(rat).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

/// Writes the trace CSV and the certificate file.
pub fn write_run(
    trace: &MarketTrace,
    member_names: &[String],
    trace_path: &std::path::Path,
    cert_path: &std::path::Path,
) -> Result<(), HarnessError> {
    let create = |p: &std::path::Path| {
        std::fs::File::create(p).map_err(|e| HarnessError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })
    };
    write_trace(std::io::BufWriter::new(create(trace_path)?), &trace.pricings)?;
    write_certificates(
        std::io::BufWriter::new(create(cert_path)?),
        &trace.certificates,
        member_names,
    )?;
    Ok(())
}

/// Per-day rows followed by a `#`-prefixed summary block.
pub fn format_exploitation_report(report: &ExploitationReport) -> String {
    let mut out = format!("# trader: {}\nday,min_value,max_value\n", report.trader);
    for d in &report.days {
        out.push_str(&format!(
            "{},{},{}\n",
            d.day,
            format_rational(&d.min),
            format_rational(&d.max)
        ));
    }
    out.push_str("# summary\n");
    out.push_str(&format!("# horizon: {}\n", report.horizon()));
    if let Some((day, v)) = report.running_min() {
        out.push_str(&format!("# running_min: {} (day {day})\n", format_rational(&v)));
    }
    if let Some(v) = report.final_max() {
        out.push_str(&format!("# running_max: {}\n", format_rational(&v)));
    }
    out.push_str(&format!("# bounded_below: {}\n", report.verdict.bounded_below));
    out.push_str(&format!("# max_increasing: {}\n", report.verdict.max_increasing));
    out.push_str(&format!(
        "# verdict: {}\n",
        if report.verdict.exploitation() {
            "exploitation trend"
        } else {
            "no exploitation"
        }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Sentence;
    use crate::rational::{half, ratio};

    #[test]
    fn trace_round_trip() {
        let a = parse_sentence("a -> (b | ~c)").unwrap();
        let day1: Pricing = [(a.clone(), half()), (Sentence::var("z"), ratio(3, 1024))]
            .into_iter()
            .collect();
        let day2: Pricing = [(a, ratio(1, 1024))].into_iter().collect();
        let trace = vec![day1, Pricing::new(), day2];
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("day,sentence,price_num,price_den\n1,\"(a -> (b | ~c))\",1,2\n"));
        // the empty middle day has no rows; it is restored as an empty pricing
        assert_eq!(read_trace(&buf[..]).unwrap(), trace);
    }

    #[test]
    fn malformed_traces() {
        assert!(read_trace("day,sentence\n".as_bytes()).is_err());
        assert!(read_trace("day,sentence,price_num,price_den\n1,\"a &\",1,2\n".as_bytes()).is_err());
        assert!(read_trace("day,sentence,price_num,price_den\n2,\"a\",1,2\n1,\"b\",1,2\n".as_bytes()).is_err());
        assert!(read_trace("day,sentence,price_num,price_den\n1,\"a\",1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let cert = DayCertificate {
            day: 1,
            epsilon: half(),
            pricing: Pricing::new(),
            firm_trade: Default::default(),
            max_value: ratio(-1, 3),
            scales: vec![ratio(1, 4), ratio(1, 1)],
            evaluations: 3,
        };
        let mut buf = Vec::new();
        write_certificates(&mut buf, std::slice::from_ref(&cert), &["a".into(), "b".into()]).unwrap();
        assert!(String::from_utf8(buf.clone())
            .unwrap()
            .starts_with("day,epsilon,max_value,scale_a,scale_b\n1,1/2,-1/3,1/4,1/1\n"));
        assert_eq!(read_certificates(&buf[..]).unwrap(), vec![CertificateRow::from(&cert)]);
    }
}
