//! Implementations of the five subcommands.

use std::path::{Path, PathBuf};

use fiscal_core::budget::{allocate_revenue, consolidate, RevenueLedger, TaxKind};
use fiscal_core::geo_tax::{
    self, excise, import_duty, income_tax, profit_tax, property_tax, turnover_regime_tax,
    vat, ImportDeclaration, ImportOperation, ProfitModel, PropertyItem, Regime, VatEvent,
};
use fiscal_core::money::Money;
use fiscal_core::scenarios::{compare_schedules, laffer_sweep, ComparatorSchedule, SweepConfig};
use fiscal_core::transfers::{allocate, TransferAllocation};
use fiscal_core::Rational;

use crate::config::EngineConfig;
use crate::ingest::{self, Ingested, Rejection, Row};
use crate::report::{
    AnyReport, BudgetCliReport, ComputeReport, LiabilityLine, ScenarioLine, ScenarioReport,
    SweepReport, TransfersReport,
};
use crate::{CliError, CommonOpts, RecordKind};

/// In strict mode any rejection aborts the run after reporting every one.
fn enforce_strictness(rejections: &[Rejection], strict: bool) -> Result<(), CliError> {
    if !strict || rejections.is_empty() {
        return Ok(());
    }
    let mut msg = format!("{} record(s) rejected:\n", rejections.len());
    for r in rejections {
        let id = r.id.as_deref().unwrap_or("-");
        msg.push_str(&format!("  line {} (id {}): {}\n", r.line, id, r.reasons.join("; ")));
    }
    msg.push_str("rerun with --lenient to continue with the valid records");
    Err(CliError::validation(msg))
}

fn line<T>(row: &Row<T>, tax_kind: TaxKind, base: Money, amount: Money) -> LiabilityLine {
    LiabilityLine {
        record: row.id.clone(),
        tax_kind,
        base,
        amount,
        jurisdiction: row.jurisdiction.clone(),
        in_autonomous_republic: row.in_autonomous_republic,
        note: None,
    }
}

fn compute_rejection<T>(row: &Row<T>, error: impl std::fmt::Display) -> Rejection {
    Rejection {
        line: row.line,
        id: if row.id.is_empty() { None } else { Some(row.id.clone()) },
        reasons: vec![error.to_string()],
    }
}

pub fn run_compute(
    input: &Path,
    kind: RecordKind,
    profit_model: ProfitModel,
    gross_up: bool,
    config: &EngineConfig,
    opts: &CommonOpts,
) -> Result<(), CliError> {
    let mut lines = Vec::new();
    let mut rejections = Vec::new();

    match kind {
        RecordKind::Persons => {
            let schedule = config.schedule("income")?;
            let Ingested { rows, rejections: rej } = ingest::ingest_persons(input)?;
            rejections.extend(rej);
            for row in &rows {
                match income_tax(&row.inner, schedule) {
                    Ok(amount) => {
                        lines.push(line(row, TaxKind::Income, row.inner.monthly_income, amount))
                    }
                    Err(e) => {
                        rejections.push(compute_rejection(row, e));
                        continue;
                    }
                }
                let income = row.inner.annual_family_income;
                for age in &row.inner.vehicles {
                    let item = PropertyItem::Vehicle { age_years: *age };
                    match property_tax(&item, income) {
                        Ok(amount) => lines.push(line(row, TaxKind::Property, Money::ZERO, amount)),
                        Err(e) => rejections.push(compute_rejection(row, e)),
                    }
                }
                for item in &row.inner.properties {
                    match property_tax(item, income) {
                        Ok(amount) => {
                            lines.push(line(row, TaxKind::Property, property_base(item), amount))
                        }
                        Err(e) => rejections.push(compute_rejection(row, e)),
                    }
                }
            }
        }
        RecordKind::Enterprises => {
            let Ingested { rows, rejections: rej } = ingest::ingest_enterprises(input)?;
            rejections.extend(rej);
            for row in &rows {
                if row.inner.regime == Regime::Standard {
                    match profit_tax(&row.inner, profit_model, gross_up) {
                        Ok(amount) => {
                            let base = match profit_model {
                                ProfitModel::Classic => row.inner.taxable_profit,
                                ProfitModel::Estonian => {
                                    row.inner.distributed_profit + row.inner.non_business_expense
                                }
                            };
                            let mut l = line(row, TaxKind::Profit, base, amount);
                            l.note = Some(match (profit_model, gross_up) {
                                (ProfitModel::Classic, _) => "classic".to_string(),
                                (ProfitModel::Estonian, false) => "estonian".to_string(),
                                (ProfitModel::Estonian, true) => "estonian gross-up".to_string(),
                            });
                            lines.push(l);
                        }
                        Err(e) => rejections.push(compute_rejection(row, e)),
                    }
                } else {
                    // Turnover-regime charges replace the entrepreneur's
                    // income tax, so they flow into the ledger as income.
                    match turnover_regime_tax(&row.inner) {
                        Ok(amount) => {
                            let mut l = line(row, TaxKind::Income, row.inner.annual_turnover, amount);
                            l.note = Some(row.inner.regime.to_string());
                            lines.push(l);
                        }
                        Err(e) => rejections.push(compute_rejection(row, e)),
                    }
                }
            }
        }
        RecordKind::Imports => {
            let Ingested { rows, rejections: rej } = ingest::ingest_imports(input)?;
            rejections.extend(rej);
            for row in &rows {
                match import_lines(row) {
                    Ok(mut ls) => lines.append(&mut ls),
                    Err(e) => rejections.push(compute_rejection(row, e)),
                }
            }
        }
        RecordKind::Excise => {
            let Ingested { rows, rejections: rej } = ingest::ingest_excise(input, config)?;
            rejections.extend(rej);
            for row in &rows {
                match excise(&row.inner) {
                    Ok(amount) => {
                        let base = match &row.inner.base {
                            geo_tax::ExciseBase::Compensation { amount } => *amount,
                            _ => Money::ZERO,
                        };
                        lines.push(line(row, TaxKind::Excise, base, amount));
                    }
                    Err(e) => rejections.push(compute_rejection(row, e)),
                }
            }
        }
        RecordKind::Property => {
            let Ingested { rows, rejections: rej } = ingest::ingest_property(input, config)?;
            rejections.extend(rej);
            for row in &rows {
                match property_tax(&row.inner.item, row.inner.family_annual_income) {
                    Ok(amount) => {
                        lines.push(line(row, TaxKind::Property, property_base(&row.inner.item), amount))
                    }
                    Err(e) => rejections.push(compute_rejection(row, e)),
                }
            }
        }
    }

    enforce_strictness(&rejections, opts.strict)?;
    let report = ComputeReport::new(kind.as_str(), lines, rejections);
    AnyReport::Compute(report).emit(opts.format, opts.out.as_deref())
}

/// Both charges on one declaration: import duty, then VAT on the
/// duty-and-excise-inclusive base. Temporary imports owe the one-time 3%
/// duty and the monthly 0.54% share of the would-be VAT.
fn import_lines(row: &Row<ImportDeclaration>) -> Result<Vec<LiabilityLine>, geo_tax::TaxError> {
    let decl = &row.inner;
    let duty = import_duty(decl)?;
    let mut out = Vec::new();
    match decl.operation {
        ImportOperation::Import => {
            let outcome = vat(VatEvent::Import {
                customs_value: decl.customs_value,
                duty,
                excise: decl.excise_amount,
            })?;
            out.push(line(row, TaxKind::ImportDuty, decl.customs_value, duty));
            let vat_base = decl.customs_value + duty + decl.excise_amount;
            out.push(line(row, TaxKind::Vat, vat_base, outcome.tax));
        }
        ImportOperation::TemporaryImport { months } => {
            let mut full = decl.clone();
            full.operation = ImportOperation::Import;
            let full_duty = import_duty(&full)?;
            let would_be_vat = vat(VatEvent::Import {
                customs_value: decl.customs_value,
                duty: full_duty,
                excise: decl.excise_amount,
            })?
            .tax;
            let temporary = vat(VatEvent::Temporary { would_be_vat, months })?;
            let mut duty_line = line(row, TaxKind::ImportDuty, decl.customs_value, duty);
            duty_line.note = Some("temporary import".to_string());
            out.push(duty_line);
            let mut vat_line = line(row, TaxKind::Vat, would_be_vat, temporary.tax);
            vat_line.note = Some(format!("temporary import, {months} month(s)"));
            out.push(vat_line);
        }
        ImportOperation::Export | ImportOperation::Reexport => {
            let outcome = vat(VatEvent::ExportOrReexport)?;
            out.push(line(row, TaxKind::ImportDuty, decl.customs_value, Money::ZERO));
            let mut vat_line = line(row, TaxKind::Vat, Money::ZERO, outcome.tax);
            vat_line.note = Some("zero-rated, input credit retained".to_string());
            out.push(vat_line);
        }
    }
    Ok(out)
}

/// The monetary figure shown in the `base` column for property items.
fn property_base(item: &PropertyItem) -> Money {
    match item {
        PropertyItem::EnterpriseAssets { begin, end, market_value, .. } => {
            let book = (begin.as_rational() + end.as_rational()) / Rational::from_integer(2);
            match market_value {
                Some(mv) if mv.as_rational() > book => *mv,
                _ => Money::round_half_up(book),
            }
        }
        PropertyItem::Household { market_value, .. } => *market_value,
        PropertyItem::Leased { initial_book_value, .. } => *initial_book_value,
        PropertyItem::Vehicle { .. } => Money::ZERO,
        PropertyItem::AgriLand { .. } => Money::ZERO,
        PropertyItem::NonagriLand { .. } => Money::ZERO,
    }
}

pub fn run_transfers(input: &Path, config: &EngineConfig, opts: &CommonOpts) -> Result<(), CliError> {
    let params_config = config.transfer_params.as_ref().ok_or_else(|| {
        CliError::validation("transfers requires a config with transfer_params".to_string())
    })?;
    let Ingested { rows, rejections } = ingest::ingest_municipalities(input)?;
    enforce_strictness(&rejections, opts.strict)?;
    let municipalities: Vec<_> = rows.into_iter().map(|r| r.inner).collect();
    let mut allocation = allocate(&municipalities, &params_config.to_params())
        .map_err(|e| CliError::validation(e.to_string()))?;
    allocation.targeted_transfers = params_config.targeted.clone();
    allocation.special_transfers = params_config.special.clone();
    let report = TransfersReport::new(allocation, rejections);
    AnyReport::Transfers(report).emit(opts.format, opts.out.as_deref())
}

pub fn run_budget(
    input: &Path,
    transfers_path: Option<&PathBuf>,
    plan_year: Option<i32>,
    opts: &CommonOpts,
) -> Result<(), CliError> {
    let Ingested { rows, rejections } = ingest::ingest_ledger(input)?;
    enforce_strictness(&rejections, opts.strict)?;
    let ledger = RevenueLedger {
        entries: rows.into_iter().map(|r| r.inner).collect(),
        plan_year,
    };
    let mut report = allocate_revenue(&ledger).map_err(|e| CliError::validation(e.to_string()))?;
    if let Some(path) = transfers_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let allocation: TransferAllocation = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        report = consolidate(&report, &allocation)
            .map_err(|e| CliError::validation(e.to_string()))?;
    }
    let report = BudgetCliReport::new(report, rejections);
    AnyReport::Budget(report).emit(opts.format, opts.out.as_deref())
}

pub fn run_scenario(
    input: Option<&PathBuf>,
    config: &EngineConfig,
    opts: &CommonOpts,
) -> Result<(), CliError> {
    let scenario = config.scenario.clone().unwrap_or_default();
    let (incomes, rejections) = match input {
        Some(path) => ingest::ingest_incomes(path)?,
        None => (scenario.incomes.clone(), Vec::new()),
    };
    enforce_strictness(&rejections, opts.strict)?;
    let currency = scenario
        .population_currency
        .clone()
        .unwrap_or_else(fiscal_core::Currency::gel);

    let mut named = Vec::new();
    let schedule_names = if scenario.schedules.is_empty() && scenario.comparators.is_empty() {
        vec!["income".to_string()]
    } else {
        scenario.schedules.clone()
    };
    for name in &schedule_names {
        named.push((name.clone(), config.schedule(name)?.clone(), false));
    }
    for country in &scenario.comparators {
        let comparator = shipped_comparator(country)?;
        named.push((comparator.country.clone(), comparator.schedule, true));
    }
    let borrowed: Vec<(&str, &fiscal_core::TaxSchedule)> =
        named.iter().map(|(n, s, _)| (n.as_str(), s)).collect();
    let revenues = compare_schedules(&incomes, &currency, &borrowed)
        .map_err(|e| CliError::validation(e.to_string()))?;
    let lines = revenues
        .into_iter()
        .zip(named.iter())
        .map(|(r, (_, _, approximate))| ScenarioLine {
            label: r.label,
            currency: r.currency.to_string(),
            total_revenue: r.total_revenue,
            approximate: *approximate,
        })
        .collect();
    let report = ScenarioReport {
        command: "scenario",
        population_size: incomes.len(),
        lines,
        rejected: rejections,
    };
    AnyReport::Scenario(report).emit(opts.format, opts.out.as_deref())
}

fn shipped_comparator(country: &str) -> Result<ComparatorSchedule, CliError> {
    match country {
        "azerbaijan" => Ok(ComparatorSchedule::azerbaijan()),
        "france" => Ok(ComparatorSchedule::france()),
        "germany" => Ok(ComparatorSchedule::germany()),
        "united_kingdom" => Ok(ComparatorSchedule::united_kingdom()),
        other => Err(CliError::validation(format!(
            "unknown comparator {other:?} (shipped: azerbaijan, france, germany, united_kingdom)"
        ))),
    }
}

pub fn run_sweep(config: &EngineConfig, opts: &CommonOpts) -> Result<(), CliError> {
    let section = config
        .scenario
        .as_ref()
        .and_then(|s| s.sweep.clone())
        .unwrap_or_default();
    let cfg: SweepConfig = section.to_config()?;
    let result = laffer_sweep(&cfg).map_err(|e| CliError::validation(e.to_string()))?;
    let report = SweepReport::new(cfg.base_b0, cfg.elasticity_gamma, result);
    AnyReport::Sweep(report).emit(opts.format, opts.out.as_deref())
}
