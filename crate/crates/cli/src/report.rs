//! Report assembly and emission.
//!
//! Machine-readable output is pretty-printed JSON with struct-ordered keys
//! and BTreeMap-ordered maps, so identical inputs produce byte-identical
//! bytes. Money serializes as decimal strings with two fraction digits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use fiscal_core::budget::{BudgetReport, TaxKind};
use fiscal_core::money::Money;
use fiscal_core::scenarios::SweepResult;
use fiscal_core::transfers::TransferAllocation;

use crate::ingest::Rejection;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiabilityLine {
    pub record: String,
    pub tax_kind: TaxKind,
    /// Monetary base where the charge is ad valorem; 0.00 for purely
    /// per-unit charges.
    pub base: Money,
    pub amount: Money,
    pub jurisdiction: String,
    pub in_autonomous_republic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ComputeReport {
    pub command: &'static str,
    pub kind: String,
    pub lines: Vec<LiabilityLine>,
    pub totals: BTreeMap<String, Money>,
    pub rejected: Vec<Rejection>,
}

impl ComputeReport {
    pub fn new(kind: &str, lines: Vec<LiabilityLine>, rejected: Vec<Rejection>) -> ComputeReport {
        let mut totals = BTreeMap::new();
        for line in &lines {
            *totals.entry(line.tax_kind.to_string()).or_insert(Money::ZERO) += line.amount;
        }
        ComputeReport { command: "compute", kind: kind.to_string(), lines, totals, rejected }
    }

    fn table(&self) -> String {
        let mut rows = Vec::new();
        for l in &self.lines {
            rows.push(vec![
                l.record.clone(),
                l.tax_kind.to_string(),
                l.base.to_string(),
                l.amount.to_string(),
                l.jurisdiction.clone(),
                l.note.clone().unwrap_or_default(),
            ]);
        }
        let mut out = render_table(
            &["record", "tax_kind", "base", "amount", "jurisdiction", "note"],
            &rows,
        );
        out.push('\n');
        for (kind, total) in &self.totals {
            out.push_str(&format!("total {kind}: {total}\n"));
        }
        out.push_str(&rejection_footer(&self.rejected));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct TransfersReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub allocation: TransferAllocation,
    pub rejected: Vec<Rejection>,
}

impl TransfersReport {
    pub fn new(allocation: TransferAllocation, rejected: Vec<Rejection>) -> TransfersReport {
        TransfersReport { command: "transfers", allocation, rejected }
    }

    fn table(&self) -> String {
        let a = &self.allocation;
        let mut out = format!(
            "plan year {}\npool G: {}   cities (72%): {}   municipalities (28%): {}\n\n",
            a.plan_year, a.pool, a.pool_city, a.pool_municipality
        );
        let rows: Vec<Vec<String>> = a
            .lines
            .iter()
            .map(|l| {
                vec![
                    l.id.clone(),
                    l.kind.to_string(),
                    l.expenditure_need.to_string(),
                    l.forecast_revenue.to_string(),
                    l.transfer.to_string(),
                ]
            })
            .collect();
        out.push_str(&render_table(&["id", "kind", "need E", "revenue R", "transfer T"], &rows));
        out.push_str(&format!(
            "\ntotal transfers: cities {}, municipalities {}\n",
            a.total_city_transfers, a.total_municipality_transfers
        ));
        for (id, amount) in &a.targeted_transfers {
            out.push_str(&format!("targeted {id}: {amount}\n"));
        }
        for (id, amount) in &a.special_transfers {
            out.push_str(&format!("special {id}: {amount}\n"));
        }
        out.push_str(&rejection_footer(&self.rejected));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct BudgetCliReport {
    pub command: &'static str,
    #[serde(flatten)]
    pub report: BudgetReport,
    pub rejected: Vec<Rejection>,
}

impl BudgetCliReport {
    pub fn new(report: BudgetReport, rejected: Vec<Rejection>) -> BudgetCliReport {
        BudgetCliReport { command: "budget", report, rejected }
    }

    fn table(&self) -> String {
        let r = &self.report;
        let mut out = format!("state budget: {}\n", r.state_total);
        let rows: Vec<Vec<String>> = r
            .local_totals
            .iter()
            .map(|(id, total)| vec![id.clone(), total.to_string()])
            .collect();
        out.push_str(&render_table(&["locality", "total"], &rows));
        if !r.transfer_lines.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = r
                .transfer_lines
                .iter()
                .map(|t| vec![t.locality.clone(), t.amount.to_string()])
                .collect();
            out.push_str(&render_table(&["transfer to", "amount"], &rows));
        }
        out.push_str(&format!("\nconsolidated total: {}\n", r.consolidated_total));
        out.push_str(&rejection_footer(&self.rejected));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct ScenarioLine {
    pub label: String,
    pub currency: String,
    pub total_revenue: Money,
    /// True for the shipped two-bracket comparator reductions.
    pub approximate: bool,
}

#[derive(Debug, Serialize)]
pub struct ScenarioReport {
    pub command: &'static str,
    pub population_size: usize,
    pub lines: Vec<ScenarioLine>,
    pub rejected: Vec<Rejection>,
}

impl ScenarioReport {
    fn table(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .lines
            .iter()
            .map(|l| {
                vec![
                    l.label.clone(),
                    l.currency.clone(),
                    l.total_revenue.to_string(),
                    if l.approximate { "approximation".to_string() } else { String::new() },
                ]
            })
            .collect();
        let mut out = format!("population: {} incomes\n", self.population_size);
        out.push_str(&render_table(&["schedule", "currency", "total revenue", ""], &rows));
        out.push_str(&rejection_footer(&self.rejected));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub base_b0: Money,
    pub elasticity_gamma: f64,
    pub argmax_rate: fiscal_core::Decimal,
    pub peak_revenue: Money,
    pub points: Vec<fiscal_core::scenarios::SweepPoint>,
}

impl SweepReport {
    pub fn new(base_b0: Money, gamma: f64, result: SweepResult) -> SweepReport {
        SweepReport {
            command: "sweep",
            base_b0,
            elasticity_gamma: gamma,
            argmax_rate: result.argmax_rate,
            peak_revenue: result.peak_revenue,
            points: result.points,
        }
    }

    fn table(&self) -> String {
        let mut out = format!(
            "base at zero rate: {}   elasticity gamma: {}\nrevenue-maximizing rate (grid): {}   peak revenue: {}\n\n",
            self.base_b0, self.elasticity_gamma, self.argmax_rate, self.peak_revenue
        );
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![p.rate.to_string(), p.modeled_base.to_string(), p.revenue.to_string()]
            })
            .collect();
        out.push_str(&render_table(&["rate", "modeled base", "revenue"], &rows));
        out
    }
}

fn rejection_footer(rejected: &[Rejection]) -> String {
    if rejected.is_empty() {
        return String::new();
    }
    let mut out = format!("\nrejected rows: {}\n", rejected.len());
    for r in rejected {
        let id = r.id.as_deref().unwrap_or("-");
        out.push_str(&format!("  line {} (id {}): {}\n", r.line, id, r.reasons.join("; ")));
    }
    out
}

fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit_row = |out: &mut String, cells: &[String]| {
        let mut parts = Vec::with_capacity(cells.len());
        for (i, cell) in cells.iter().enumerate() {
            parts.push(format!("{:width$}", cell, width = widths[i]));
        }
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    emit_row(&mut out, &headers.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    emit_row(
        &mut out,
        &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>(),
    );
    for row in rows {
        emit_row(&mut out, row);
    }
    out
}

/// Renders a report in the requested format.
pub enum AnyReport {
    Compute(ComputeReport),
    Transfers(TransfersReport),
    Budget(BudgetCliReport),
    Scenario(ScenarioReport),
    Sweep(SweepReport),
}

impl AnyReport {
    fn json(&self) -> Result<String, CliError> {
        let text = match self {
            AnyReport::Compute(r) => serde_json::to_string_pretty(r),
            AnyReport::Transfers(r) => serde_json::to_string_pretty(r),
            AnyReport::Budget(r) => serde_json::to_string_pretty(r),
            AnyReport::Scenario(r) => serde_json::to_string_pretty(r),
            AnyReport::Sweep(r) => serde_json::to_string_pretty(r),
        };
        text.map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::validation(format!("serialization failed: {e}")))
    }

    fn table(&self) -> String {
        match self {
            AnyReport::Compute(r) => r.table(),
            AnyReport::Transfers(r) => r.table(),
            AnyReport::Budget(r) => r.table(),
            AnyReport::Scenario(r) => r.table(),
            AnyReport::Sweep(r) => r.table(),
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let text = match format {
            Format::Json => self.json()?,
            Format::Table => self.table(),
        };
        match out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
