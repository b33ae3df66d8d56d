//! Revenue allocation between the state and local budgets, and the
//! consolidated roll-up.
//!
//! Profit tax, VAT, excise, and import duty accrue fully to the state
//! budget. Income tax accrues to the state unless collected for a
//! municipal budget of an autonomous republic. Property tax is the local
//! tax and stays with its jurisdiction. Transfers move money from the
//! state to localities without changing the consolidated total.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::transfers::TransferAllocation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BudgetError {
    #[error("ledger entry {index} has a negative amount {amount}")]
    NegativeAmount { index: usize, amount: Money },
    #[error("ledger entry {index} carries {kind} but no jurisdiction")]
    MissingJurisdiction { index: usize, kind: TaxKind },
    #[error("transfer to unknown locality {0}")]
    UnknownLocality(String),
    #[error("report is for plan year {report}, transfers for {transfers}")]
    PlanYearMismatch { report: i32, transfers: i32 },
}

/// The six taxes of the current code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxKind {
    Income,
    Profit,
    Vat,
    Excise,
    ImportDuty,
    Property,
}

impl std::fmt::Display for TaxKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaxKind::Income => "income",
            TaxKind::Profit => "profit",
            TaxKind::Vat => "vat",
            TaxKind::Excise => "excise",
            TaxKind::ImportDuty => "import_duty",
            TaxKind::Property => "property",
        })
    }
}

impl std::str::FromStr for TaxKind {
    type Err = String;
    fn from_str(s: &str) -> Result<TaxKind, String> {
        match s {
            "income" => Ok(TaxKind::Income),
            "profit" => Ok(TaxKind::Profit),
            "vat" => Ok(TaxKind::Vat),
            "excise" => Ok(TaxKind::Excise),
            "import_duty" => Ok(TaxKind::ImportDuty),
            "property" => Ok(TaxKind::Property),
            other => Err(format!("unknown tax kind {other:?}")),
        }
    }
}

/// One collected amount, tagged with its tax kind and jurisdiction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tax_kind: TaxKind,
    pub amount: Money,
    /// Municipality id; required for property tax and autonomous-republic income tax.
    #[serde(default)]
    pub jurisdiction: String,
    #[serde(default)]
    pub in_autonomous_republic: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RevenueLedger {
    pub entries: Vec<LedgerEntry>,
    /// Optional plan-year tag checked when consolidating with transfers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferOutflow {
    pub locality: String,
    pub amount: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub state_total: Money,
    /// Per-locality totals, ordered by id.
    pub local_totals: BTreeMap<String, Money>,
    pub consolidated_total: Money,
    /// Transfer lines applied by `consolidate`; empty before consolidation.
    #[serde(default)]
    pub transfer_lines: Vec<TransferOutflow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_year: Option<i32>,
}

/// Routes every ledger entry into exactly one budget.
pub fn allocate_revenue(ledger: &RevenueLedger) -> Result<BudgetReport, BudgetError> {
    let mut state_total = Money::ZERO;
    let mut local_totals: BTreeMap<String, Money> = BTreeMap::new();
    for (index, entry) in ledger.entries.iter().enumerate() {
        if entry.amount.is_negative() {
            return Err(BudgetError::NegativeAmount { index, amount: entry.amount });
        }
        let local = match entry.tax_kind {
            TaxKind::Profit | TaxKind::Vat | TaxKind::Excise | TaxKind::ImportDuty => None,
            TaxKind::Property => Some(&entry.jurisdiction),
            TaxKind::Income => {
                if entry.in_autonomous_republic {
                    Some(&entry.jurisdiction)
                } else {
                    None
                }
            }
        };
        match local {
            Some(jurisdiction) => {
                if jurisdiction.is_empty() {
                    return Err(BudgetError::MissingJurisdiction { index, kind: entry.tax_kind });
                }
                *local_totals.entry(jurisdiction.clone()).or_insert(Money::ZERO) += entry.amount;
            }
            None => state_total += entry.amount,
        }
    }
    let consolidated_total = state_total + local_totals.values().copied().sum::<Money>();
    Ok(BudgetReport {
        state_total,
        local_totals,
        consolidated_total,
        transfer_lines: Vec::new(),
        plan_year: ledger.plan_year,
    })
}

/// Applies equalization and pass-through transfers: state budget down,
/// locality budgets up, consolidated total untouched.
pub fn consolidate(
    report: &BudgetReport,
    transfers: &TransferAllocation,
) -> Result<BudgetReport, BudgetError> {
    if let Some(year) = report.plan_year {
        if year != transfers.plan_year {
            return Err(BudgetError::PlanYearMismatch { report: year, transfers: transfers.plan_year });
        }
    }
    let mut out = report.clone();
    let mut ids: Vec<&String> = transfers
        .lines
        .iter()
        .map(|l| &l.id)
        .chain(transfers.targeted_transfers.keys())
        .chain(transfers.special_transfers.keys())
        .collect();
    ids.sort();
    ids.dedup();
    for id in ids {
        let amount = transfers.total_for(id);
        if amount == Money::ZERO {
            continue;
        }
        let local = out
            .local_totals
            .get_mut(id)
            .ok_or_else(|| BudgetError::UnknownLocality(id.clone()))?;
        *local += amount;
        out.state_total -= amount;
        out.transfer_lines.push(TransferOutflow { locality: id.clone(), amount });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Decimal;
    use crate::transfers::{allocate, Municipality, MunicipalityKind, TransferParams};

    fn entry(kind: TaxKind, major: i64) -> LedgerEntry {
        LedgerEntry {
            tax_kind: kind,
            amount: Money::from_major(major),
            jurisdiction: String::new(),
            in_autonomous_republic: false,
        }
    }

    fn local_entry(kind: TaxKind, major: i64, jurisdiction: &str, in_ar: bool) -> LedgerEntry {
        LedgerEntry {
            tax_kind: kind,
            amount: Money::from_major(major),
            jurisdiction: jurisdiction.to_string(),
            in_autonomous_republic: in_ar,
        }
    }

    #[test]
    fn allocation_routes_by_kind() {
        let ledger = RevenueLedger {
            entries: vec![
                entry(TaxKind::Vat, 100),
                entry(TaxKind::Profit, 50),
                local_entry(TaxKind::Property, 30, "x", false),
                entry(TaxKind::Income, 70),
            ],
            plan_year: None,
        };
        let report = allocate_revenue(&ledger).unwrap();
        assert_eq!(report.state_total, Money::from_major(220));
        assert_eq!(report.local_totals["x"], Money::from_major(30));
        assert_eq!(report.consolidated_total, Money::from_major(250));
    }

    #[test]
    fn empty_ledger_is_all_zeros() {
        let report = allocate_revenue(&RevenueLedger::default()).unwrap();
        assert_eq!(report.state_total, Money::ZERO);
        assert!(report.local_totals.is_empty());
        assert_eq!(report.consolidated_total, Money::ZERO);
    }

    #[test]
    fn autonomous_republic_income_stays_local() {
        let ledger = RevenueLedger {
            entries: vec![local_entry(TaxKind::Income, 70, "y", true)],
            plan_year: None,
        };
        let report = allocate_revenue(&ledger).unwrap();
        assert_eq!(report.state_total, Money::ZERO);
        assert_eq!(report.local_totals["y"], Money::from_major(70));
    }

    #[test]
    fn negative_amount_rejected() {
        let ledger = RevenueLedger {
            entries: vec![LedgerEntry {
                tax_kind: TaxKind::Vat,
                amount: Money::from_minor(-1),
                jurisdiction: String::new(),
                in_autonomous_republic: false,
            }],
            plan_year: None,
        };
        assert!(matches!(allocate_revenue(&ledger), Err(BudgetError::NegativeAmount { .. })));
    }

    fn allocation_for(ids: &[(&str, &str, i64)]) -> TransferAllocation {
        // Flat revenue histories pin R; shares must sum to 1 per group.
        let municipalities: Vec<Municipality> = ids
            .iter()
            .map(|(id, share, revenue)| Municipality {
                id: id.to_string(),
                kind: MunicipalityKind::City,
                coefficient_share: share.parse::<Decimal>().unwrap(),
                own_revenue_actuals: [Money::from_major(*revenue); 3],
                own_revenue_forecast_current: Money::from_major(*revenue),
                plan_year: 2019,
            })
            .collect();
        let params = TransferParams::new(Money::from_major(2_500), Money::from_major(100));
        allocate(&municipalities, &params).unwrap()
    }

    #[test]
    fn consolidation_moves_state_money_to_localities() {
        let ledger = RevenueLedger {
            entries: vec![
                entry(TaxKind::Vat, 100),
                local_entry(TaxKind::Property, 5, "x", false),
                local_entry(TaxKind::Property, 5, "y", false),
            ],
            plan_year: Some(2019),
        };
        let report = allocate_revenue(&ledger).unwrap();
        // City pool is 72: x needs 43.20 with zero revenue, y is saturated.
        let transfers = allocation_for(&[("x", "0.6", 0), ("y", "0.4", 1_000)]);
        let consolidated = consolidate(&report, &transfers).unwrap();
        let moved = transfers.total_for("x");
        assert_eq!(consolidated.state_total, report.state_total - moved);
        assert_eq!(consolidated.local_totals["x"], report.local_totals["x"] + moved);
        assert_eq!(consolidated.consolidated_total, report.consolidated_total);
    }

    #[test]
    fn zero_transfers_leave_report_unchanged() {
        let ledger = RevenueLedger {
            entries: vec![entry(TaxKind::Vat, 100), local_entry(TaxKind::Property, 5, "x", false)],
            plan_year: Some(2019),
        };
        let report = allocate_revenue(&ledger).unwrap();
        let transfers = allocation_for(&[("x", "1", 1_000_000)]);
        let consolidated = consolidate(&report, &transfers).unwrap();
        assert_eq!(consolidated, report);
    }

    #[test]
    fn unknown_locality_is_a_data_error() {
        let ledger = RevenueLedger { entries: vec![entry(TaxKind::Vat, 100)], plan_year: Some(2019) };
        let report = allocate_revenue(&ledger).unwrap();
        let transfers = allocation_for(&[("ghost", "1", 0)]);
        assert!(matches!(
            consolidate(&report, &transfers),
            Err(BudgetError::UnknownLocality(id)) if id == "ghost"
        ));
    }

    #[test]
    fn plan_year_mismatch_is_rejected() {
        let ledger = RevenueLedger {
            entries: vec![local_entry(TaxKind::Property, 5, "x", false)],
            plan_year: Some(2020),
        };
        let report = allocate_revenue(&ledger).unwrap();
        let transfers = allocation_for(&[("x", "1", 0)]);
        assert!(matches!(
            consolidate(&report, &transfers),
            Err(BudgetError::PlanYearMismatch { report: 2020, transfers: 2019 })
        ));
    }
}
