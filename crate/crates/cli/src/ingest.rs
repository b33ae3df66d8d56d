//! CSV/JSON batch ingestion with per-row validation.
//!
//! Input files are CSV (header row, comma, UTF-8, period decimal) or JSON
//! (an array of objects; detected by the first non-blank byte). Every
//! record either passes its type's validation or lands in the rejection
//! report with its line number and the violated invariants. For JSON
//! inputs the reported "line" is the record's ordinal in the array.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fiscal_core::budget::{LedgerEntry, TaxKind};
use fiscal_core::geo_tax::{
    DutyClass, EnterpriseRecord, ExciseBase, ExciseCategory, ExciseItem, ExciseRate,
    ImportDeclaration, ImportGoods, ImportOperation, PersonRecord, PropertyItem, Regime,
};
use fiscal_core::money::{Currency, Decimal, Money};
use fiscal_core::transfers::{Municipality, MunicipalityKind};

use crate::config::EngineConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub reasons: Vec<String>,
}

/// One accepted record with its source line and ledger linkage fields.
#[derive(Debug, Clone)]
pub struct Row<T> {
    pub line: usize,
    pub id: String,
    pub jurisdiction: String,
    pub in_autonomous_republic: bool,
    pub inner: T,
}

#[derive(Debug, Clone)]
pub struct Ingested<T> {
    pub rows: Vec<Row<T>>,
    pub rejections: Vec<Rejection>,
}

/// Property rows carry the family income context next to the item.
#[derive(Debug, Clone)]
pub struct PropertyCase {
    pub item: PropertyItem,
    pub family_annual_income: Money,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn is_json(text: &str) -> bool {
    matches!(text.trim_start().chars().next(), Some('[') | Some('{'))
}

fn parse_variant<T: serde::de::DeserializeOwned>(s: &str) -> Option<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
}

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

struct CsvTable {
    headers: Vec<String>,
    records: Vec<(usize, csv::StringRecord)>,
}

fn read_csv(
    path: &Path,
    text: &str,
    allowed: &[&str],
    required: &[&str],
) -> Result<CsvTable, CliError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for h in &headers {
        if !allowed.contains(&h.as_str()) {
            return Err(CliError::validation(format!(
                "{}: unknown column {h:?} (allowed: {})",
                path.display(),
                allowed.join(", ")
            )));
        }
    }
    for r in required {
        if !headers.iter().any(|h| h == r) {
            return Err(CliError::validation(format!(
                "{}: missing required column {r:?}",
                path.display()
            )));
        }
    }
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        records.push((line, rec));
    }
    Ok(CsvTable { headers, records })
}

/// Field accessor over one CSV record; parse failures accumulate as reasons.
struct Cells<'a> {
    headers: &'a [String],
    record: &'a csv::StringRecord,
    errors: Vec<String>,
}

impl<'a> Cells<'a> {
    fn new(headers: &'a [String], record: &'a csv::StringRecord) -> Cells<'a> {
        Cells { headers, record, errors: Vec::new() }
    }

    fn raw(&self, name: &str) -> Option<&'a str> {
        let idx = self.headers.iter().position(|h| h == name)?;
        let value = self.record.get(idx)?.trim();
        if value.is_empty() {
            None
        } else {
            Some(value)
        }
    }

    fn string(&self, name: &str) -> String {
        self.raw(name).unwrap_or("").to_string()
    }

    fn money(&mut self, name: &str) -> Option<Money> {
        let raw = self.raw(name)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{name}: {e}"));
                None
            }
        }
    }

    fn money_or(&mut self, name: &str, default: Money) -> Money {
        self.money(name).unwrap_or(default)
    }

    fn require_money(&mut self, name: &str) -> Money {
        match self.raw(name) {
            Some(_) => self.money(name).unwrap_or(Money::ZERO),
            None => {
                self.errors.push(format!("{name}: required"));
                Money::ZERO
            }
        }
    }

    fn decimal(&mut self, name: &str) -> Option<Decimal> {
        let raw = self.raw(name)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{name}: {e}"));
                None
            }
        }
    }

    fn u32(&mut self, name: &str) -> Option<u32> {
        let raw = self.raw(name)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{name}: expected a whole number, got {raw:?}"));
                None
            }
        }
    }

    fn i32(&mut self, name: &str) -> Option<i32> {
        let raw = self.raw(name)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{name}: expected a whole number, got {raw:?}"));
                None
            }
        }
    }

    fn bool_or(&mut self, name: &str, default: bool) -> bool {
        match self.raw(name) {
            None => default,
            Some(raw) => match raw.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                other => {
                    self.errors.push(format!("{name}: expected a boolean, got {other:?}"));
                    default
                }
            },
        }
    }

    fn require(&mut self, name: &str) -> Option<&'a str> {
        let value = self.raw(name);
        if value.is_none() {
            self.errors.push(format!("{name}: required"));
        }
        value
    }
}

fn reject(line: usize, id: Option<String>, reasons: Vec<String>) -> Rejection {
    Rejection { line, id, reasons }
}

fn finish<T>(
    line: usize,
    id: String,
    jurisdiction: String,
    in_ar: bool,
    inner: T,
    mut errors: Vec<String>,
    invariants: Vec<fiscal_core::geo_tax::FieldViolation>,
) -> Result<Row<T>, Rejection> {
    errors.extend(invariants.iter().map(|v| v.to_string()));
    if errors.is_empty() {
        Ok(Row { line, id, jurisdiction, in_autonomous_republic: in_ar, inner })
    } else {
        Err(reject(line, if id.is_empty() { None } else { Some(id) }, errors))
    }
}

fn collect<T>(results: Vec<Result<Row<T>, Rejection>>) -> Ingested<T> {
    let mut rows = Vec::new();
    let mut rejections = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(rejection) => rejections.push(rejection),
        }
    }
    Ingested { rows, rejections }
}

// ---------------------------------------------------------------------------
// Persons
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPerson {
    id: Option<String>,
    monthly_income: Option<Money>,
    annual_family_income: Option<Money>,
    jurisdiction: Option<String>,
    in_autonomous_republic: Option<bool>,
    currency: Option<String>,
    vehicles: Option<Vec<u32>>,
    properties: Option<Vec<PropertyItem>>,
}

fn person_from_raw(line: usize, raw: RawPerson, mut errors: Vec<String>) -> Result<Row<PersonRecord>, Rejection> {
    if raw.monthly_income.is_none() && errors.is_empty() {
        errors.push("monthly_income: required".to_string());
    }
    let record = PersonRecord {
        monthly_income: raw.monthly_income.unwrap_or(Money::ZERO),
        annual_family_income: raw.annual_family_income.unwrap_or(Money::ZERO),
        vehicles: raw.vehicles.unwrap_or_default(),
        properties: raw.properties.unwrap_or_default(),
        currency: Currency(raw.currency.unwrap_or_else(|| "GEL".to_string())),
    };
    let invariants = record.validate();
    finish(
        line,
        raw.id.unwrap_or_default(),
        raw.jurisdiction.unwrap_or_default(),
        raw.in_autonomous_republic.unwrap_or(false),
        record,
        errors,
        invariants,
    )
}

pub fn ingest_persons(path: &Path) -> Result<Ingested<PersonRecord>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let raws: Vec<RawPerson> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(collect(
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| person_from_raw(i + 1, raw, Vec::new()))
                .collect(),
        ));
    }
    let table = read_csv(
        path,
        &text,
        &["id", "monthly_income", "annual_family_income", "jurisdiction", "in_autonomous_republic", "currency"],
        &["monthly_income"],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawPerson {
                id: Some(cells.string("id")),
                monthly_income: Some(cells.require_money("monthly_income")),
                annual_family_income: Some(cells.money_or("annual_family_income", Money::ZERO)),
                jurisdiction: Some(cells.string("jurisdiction")),
                in_autonomous_republic: Some(cells.bool_or("in_autonomous_republic", false)),
                currency: cells.raw("currency").map(str::to_string),
                vehicles: None,
                properties: None,
            };
            person_from_raw(*line, raw, cells.errors)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Enterprises
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawEnterprise {
    id: Option<String>,
    regime: Option<String>,
    taxable_profit: Option<Money>,
    distributed_profit: Option<Money>,
    non_business_expense: Option<Money>,
    asset_value_begin: Option<Money>,
    asset_value_end: Option<Money>,
    annual_turnover: Option<Money>,
    documented_expense_share: Option<Decimal>,
    employs_hired_labor: Option<bool>,
    jurisdiction: Option<String>,
    in_autonomous_republic: Option<bool>,
}

fn enterprise_from_raw(
    line: usize,
    raw: RawEnterprise,
    mut errors: Vec<String>,
) -> Result<Row<EnterpriseRecord>, Rejection> {
    let regime = match raw.regime.as_deref() {
        None => Regime::Standard,
        Some(s) => parse_variant::<Regime>(s).unwrap_or_else(|| {
            errors.push(format!("regime: expected standard|micro|small, got {s:?}"));
            Regime::Standard
        }),
    };
    let record = EnterpriseRecord {
        regime,
        taxable_profit: raw.taxable_profit.unwrap_or(Money::ZERO),
        distributed_profit: raw.distributed_profit.unwrap_or(Money::ZERO),
        non_business_expense: raw.non_business_expense.unwrap_or(Money::ZERO),
        asset_value_begin: raw.asset_value_begin.unwrap_or(Money::ZERO),
        asset_value_end: raw.asset_value_end.unwrap_or(Money::ZERO),
        annual_turnover: raw.annual_turnover.unwrap_or(Money::ZERO),
        documented_expense_share: raw.documented_expense_share.unwrap_or(Decimal::ZERO),
        employs_hired_labor: raw.employs_hired_labor.unwrap_or(false),
    };
    let invariants = record.validate();
    finish(
        line,
        raw.id.unwrap_or_default(),
        raw.jurisdiction.unwrap_or_default(),
        raw.in_autonomous_republic.unwrap_or(false),
        record,
        errors,
        invariants,
    )
}

pub fn ingest_enterprises(path: &Path) -> Result<Ingested<EnterpriseRecord>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let raws: Vec<RawEnterprise> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(collect(
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| enterprise_from_raw(i + 1, raw, Vec::new()))
                .collect(),
        ));
    }
    let table = read_csv(
        path,
        &text,
        &[
            "id", "regime", "taxable_profit", "distributed_profit", "non_business_expense",
            "asset_value_begin", "asset_value_end", "annual_turnover", "documented_expense_share",
            "employs_hired_labor", "jurisdiction", "in_autonomous_republic",
        ],
        &[],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawEnterprise {
                id: Some(cells.string("id")),
                regime: cells.raw("regime").map(str::to_string),
                taxable_profit: cells.money("taxable_profit"),
                distributed_profit: cells.money("distributed_profit"),
                non_business_expense: cells.money("non_business_expense"),
                asset_value_begin: cells.money("asset_value_begin"),
                asset_value_end: cells.money("asset_value_end"),
                annual_turnover: cells.money("annual_turnover"),
                documented_expense_share: cells.decimal("documented_expense_share"),
                employs_hired_labor: Some(cells.bool_or("employs_hired_labor", false)),
                jurisdiction: Some(cells.string("jurisdiction")),
                in_autonomous_republic: Some(cells.bool_or("in_autonomous_republic", false)),
            };
            enterprise_from_raw(*line, raw, cells.errors)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Import declarations
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawImport {
    id: Option<String>,
    operation: Option<String>,
    months: Option<u32>,
    customs_value: Option<Money>,
    duty_class: Option<String>,
    excise_amount: Option<Money>,
    goods: Option<String>,
    engine_cc: Option<u32>,
    years_in_service: Option<u32>,
    liters: Option<Decimal>,
    abv: Option<Decimal>,
    alcohol_unit_rate: Option<Money>,
    jurisdiction: Option<String>,
}

fn import_from_raw(line: usize, raw: RawImport, mut errors: Vec<String>) -> Result<Row<ImportDeclaration>, Rejection> {
    let operation = match raw.operation.as_deref() {
        None => {
            errors.push("operation: required".to_string());
            ImportOperation::Import
        }
        Some("import") => ImportOperation::Import,
        Some("export") => ImportOperation::Export,
        Some("reexport") => ImportOperation::Reexport,
        Some("temporary_import") => match raw.months {
            Some(months) => ImportOperation::TemporaryImport { months },
            None => {
                errors.push("months: required for temporary_import".to_string());
                ImportOperation::TemporaryImport { months: 1 }
            }
        },
        Some(other) => {
            errors.push(format!(
                "operation: expected import|temporary_import|export|reexport, got {other:?}"
            ));
            ImportOperation::Import
        }
    };
    let goods = match raw.goods.as_deref() {
        None | Some("") => None,
        Some("vehicle") => match raw.engine_cc {
            Some(engine_cc) => Some(ImportGoods::Vehicle {
                engine_cc,
                years_in_service: raw.years_in_service.unwrap_or(0),
            }),
            None => {
                errors.push("engine_cc: required for vehicle goods".to_string());
                None
            }
        },
        Some("alcohol") => {
            match (raw.liters, raw.abv, raw.alcohol_unit_rate) {
                (Some(liters), Some(abv), Some(unit_rate)) => {
                    Some(ImportGoods::Alcohol { liters, abv, unit_rate })
                }
                _ => {
                    errors.push(
                        "liters/abv/alcohol_unit_rate: required for alcohol goods".to_string(),
                    );
                    None
                }
            }
        }
        Some(other) => {
            errors.push(format!("goods: expected vehicle|alcohol, got {other:?}"));
            None
        }
    };
    let duty_class = match raw.duty_class.as_deref() {
        None | Some("") => {
            if goods.is_none() && !matches!(operation, ImportOperation::Export | ImportOperation::Reexport) {
                errors.push("duty_class: required unless goods carry their own regime".to_string());
            }
            DutyClass::Exempt
        }
        Some(s) => parse_variant::<DutyClass>(s).unwrap_or_else(|| {
            errors.push(format!("duty_class: expected pct12|pct5|exempt, got {s:?}"));
            DutyClass::Exempt
        }),
    };
    let decl = ImportDeclaration {
        operation,
        customs_value: raw.customs_value.unwrap_or(Money::ZERO),
        duty_class,
        excise_amount: raw.excise_amount.unwrap_or(Money::ZERO),
        goods,
    };
    let invariants = decl.validate();
    finish(
        line,
        raw.id.unwrap_or_default(),
        raw.jurisdiction.unwrap_or_default(),
        false,
        decl,
        errors,
        invariants,
    )
}

pub fn ingest_imports(path: &Path) -> Result<Ingested<ImportDeclaration>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let raws: Vec<RawImport> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(collect(
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| import_from_raw(i + 1, raw, Vec::new()))
                .collect(),
        ));
    }
    let table = read_csv(
        path,
        &text,
        &[
            "id", "operation", "months", "customs_value", "duty_class", "excise_amount",
            "goods", "engine_cc", "years_in_service", "liters", "abv", "alcohol_unit_rate",
            "jurisdiction",
        ],
        &["operation", "customs_value"],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawImport {
                id: Some(cells.string("id")),
                operation: cells.require("operation").map(str::to_string),
                months: cells.u32("months"),
                customs_value: Some(cells.require_money("customs_value")),
                duty_class: cells.raw("duty_class").map(str::to_string),
                excise_amount: cells.money("excise_amount"),
                goods: cells.raw("goods").map(str::to_string),
                engine_cc: cells.u32("engine_cc"),
                years_in_service: cells.u32("years_in_service"),
                liters: cells.decimal("liters"),
                abv: cells.decimal("abv"),
                alcohol_unit_rate: cells.money("alcohol_unit_rate"),
                jurisdiction: Some(cells.string("jurisdiction")),
            };
            import_from_raw(*line, raw, cells.errors)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Excise items
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawExcise {
    id: Option<String>,
    category: Option<String>,
    quantity: Option<Decimal>,
    engine_cc: Option<u32>,
    age_years: Option<u32>,
    compensation: Option<Money>,
    per_unit_rate: Option<Money>,
    fraction_rate: Option<Decimal>,
    jurisdiction: Option<String>,
}

fn excise_from_raw(
    line: usize,
    raw: RawExcise,
    mut errors: Vec<String>,
    config: &EngineConfig,
) -> Result<Row<ExciseItem>, Rejection> {
    let category = match raw.category.as_deref() {
        None => {
            errors.push("category: required".to_string());
            ExciseCategory::Alcohol
        }
        Some(s) => parse_variant::<ExciseCategory>(s).unwrap_or_else(|| {
            errors.push(format!("category: unknown excise category {s:?}"));
            ExciseCategory::Alcohol
        }),
    };
    let quantity = raw.quantity.unwrap_or(Decimal::ZERO);
    let base = match category {
        ExciseCategory::Alcohol => ExciseBase::Volume { liters: quantity },
        ExciseCategory::Tobacco => ExciseBase::QuantityOrWeight { units: quantity },
        ExciseCategory::OilProducts
        | ExciseCategory::DistilledOils
        | ExciseCategory::OilGases
        | ExciseCategory::Additives
        | ExciseCategory::Lubricants => ExciseBase::WeightOrVolume { units: quantity },
        ExciseCategory::Vehicles => match raw.engine_cc {
            Some(engine_cc) => {
                ExciseBase::Vehicle { engine_cc, age_years: raw.age_years.unwrap_or(0) }
            }
            None => {
                errors.push("engine_cc: required for the vehicles category".to_string());
                ExciseBase::Vehicle { engine_cc: 1, age_years: 0 }
            }
        },
        ExciseCategory::NaturalGas => ExciseBase::GasVolume { cubic_meters: quantity },
        ExciseCategory::MobileServices => match raw.compensation {
            Some(amount) => ExciseBase::Compensation { amount },
            None => {
                errors.push("compensation: required for mobile_services".to_string());
                ExciseBase::Compensation { amount: Money::ZERO }
            }
        },
    };
    let category_key = category.to_string();
    let unit_rate = match (raw.per_unit_rate, raw.fraction_rate) {
        (Some(_), Some(_)) => {
            errors.push("per_unit_rate/fraction_rate: give at most one".to_string());
            ExciseRate::PerUnit(Money::ZERO)
        }
        (Some(rate), None) => ExciseRate::PerUnit(rate),
        (None, Some(fraction)) => ExciseRate::Fraction(fraction),
        (None, None) => match config.excise_rates.get(&category_key) {
            Some(entry) => match (entry.per_unit, entry.fraction) {
                (Some(rate), _) => ExciseRate::PerUnit(rate),
                (_, Some(fraction)) => ExciseRate::Fraction(fraction),
                _ => unreachable!("config validation enforces one of the two"),
            },
            None => {
                errors.push(format!(
                    "unit_rate: no rate on the row and no excise_rates.{category_key} in config"
                ));
                ExciseRate::PerUnit(Money::ZERO)
            }
        },
    };
    let item = ExciseItem { category, base, unit_rate };
    let invariants = item.validate();
    finish(
        line,
        raw.id.unwrap_or_default(),
        raw.jurisdiction.unwrap_or_default(),
        false,
        item,
        errors,
        invariants,
    )
}

pub fn ingest_excise(path: &Path, config: &EngineConfig) -> Result<Ingested<ExciseItem>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let raws: Vec<RawExcise> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(collect(
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| excise_from_raw(i + 1, raw, Vec::new(), config))
                .collect(),
        ));
    }
    let table = read_csv(
        path,
        &text,
        &[
            "id", "category", "quantity", "engine_cc", "age_years", "compensation",
            "per_unit_rate", "fraction_rate", "jurisdiction",
        ],
        &["category"],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawExcise {
                id: Some(cells.string("id")),
                category: cells.require("category").map(str::to_string),
                quantity: cells.decimal("quantity"),
                engine_cc: cells.u32("engine_cc"),
                age_years: cells.u32("age_years"),
                compensation: cells.money("compensation"),
                per_unit_rate: cells.money("per_unit_rate"),
                fraction_rate: cells.decimal("fraction_rate"),
                jurisdiction: Some(cells.string("jurisdiction")),
            };
            excise_from_raw(*line, raw, cells.errors, config)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Property items
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawProperty {
    id: Option<String>,
    kind: Option<String>,
    begin: Option<Money>,
    end: Option<Money>,
    market_value: Option<Money>,
    rate: Option<Decimal>,
    municipal_rate: Option<Decimal>,
    initial_book_value: Option<Money>,
    age_years: Option<u32>,
    hectares: Option<Decimal>,
    per_ha_rate: Option<Money>,
    area_m2: Option<Decimal>,
    territorial_coefficient: Option<Decimal>,
    family_annual_income: Option<Money>,
    jurisdiction: Option<String>,
}

fn property_from_raw(
    line: usize,
    raw: RawProperty,
    mut errors: Vec<String>,
    config: &EngineConfig,
) -> Result<Row<PropertyCase>, Rejection> {
    let jurisdiction = raw.jurisdiction.clone().unwrap_or_default();
    let require_money = |field: &str, value: Option<Money>, errors: &mut Vec<String>| {
        value.unwrap_or_else(|| {
            errors.push(format!("{field}: required"));
            Money::ZERO
        })
    };
    let item = match raw.kind.as_deref() {
        Some("enterprise_assets") => PropertyItem::EnterpriseAssets {
            begin: require_money("begin", raw.begin, &mut errors),
            end: require_money("end", raw.end, &mut errors),
            market_value: raw.market_value,
            // The statutory ceiling doubles as the default rate.
            rate: raw.rate.unwrap_or(Decimal::new(1, 100)),
        },
        Some("household") => {
            let municipal_rate = raw
                .municipal_rate
                .or_else(|| config.municipal_rate(&jurisdiction))
                .unwrap_or_else(|| {
                    errors.push(
                        "municipal_rate: required (no row value, no municipal_rates in config)"
                            .to_string(),
                    );
                    Decimal::ZERO
                });
            PropertyItem::Household {
                market_value: require_money("market_value", raw.market_value, &mut errors),
                municipal_rate,
            }
        }
        Some("leased") => PropertyItem::Leased {
            initial_book_value: require_money(
                "initial_book_value",
                raw.initial_book_value,
                &mut errors,
            ),
            rate: raw.rate.unwrap_or(Decimal::new(6, 1000)),
        },
        Some("vehicle") => PropertyItem::Vehicle {
            age_years: raw.age_years.unwrap_or_else(|| {
                errors.push("age_years: required for vehicle".to_string());
                0
            }),
        },
        Some("agri_land") => {
            let per_ha_rate = raw
                .per_ha_rate
                .or_else(|| config.land_rate(&jurisdiction))
                .unwrap_or_else(|| {
                    errors.push(
                        "per_ha_rate: required (no row value, no land_rates in config)".to_string(),
                    );
                    Money::ZERO
                });
            PropertyItem::AgriLand {
                hectares: raw.hectares.unwrap_or_else(|| {
                    errors.push("hectares: required for agri_land".to_string());
                    Decimal::ZERO
                }),
                per_ha_rate,
            }
        }
        Some("nonagri_land") => PropertyItem::NonagriLand {
            area_m2: raw.area_m2.unwrap_or_else(|| {
                errors.push("area_m2: required for nonagri_land".to_string());
                Decimal::ZERO
            }),
            territorial_coefficient: raw.territorial_coefficient.unwrap_or(Decimal::ONE),
        },
        Some(other) => {
            errors.push(format!("kind: unknown property kind {other:?}"));
            PropertyItem::Vehicle { age_years: 0 }
        }
        None => {
            errors.push("kind: required".to_string());
            PropertyItem::Vehicle { age_years: 0 }
        }
    };
    let invariants = item.validate();
    let case = PropertyCase {
        item,
        family_annual_income: raw.family_annual_income.unwrap_or(Money::ZERO),
    };
    finish(line, raw.id.unwrap_or_default(), jurisdiction, false, case, errors, invariants)
}

pub fn ingest_property(path: &Path, config: &EngineConfig) -> Result<Ingested<PropertyCase>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let raws: Vec<RawProperty> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok(collect(
            raws.into_iter()
                .enumerate()
                .map(|(i, raw)| property_from_raw(i + 1, raw, Vec::new(), config))
                .collect(),
        ));
    }
    let table = read_csv(
        path,
        &text,
        &[
            "id", "kind", "begin", "end", "market_value", "rate", "municipal_rate",
            "initial_book_value", "age_years", "hectares", "per_ha_rate", "area_m2",
            "territorial_coefficient", "family_annual_income", "jurisdiction",
        ],
        &["kind"],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawProperty {
                id: Some(cells.string("id")),
                kind: cells.require("kind").map(str::to_string),
                begin: cells.money("begin"),
                end: cells.money("end"),
                market_value: cells.money("market_value"),
                rate: cells.decimal("rate"),
                municipal_rate: cells.decimal("municipal_rate"),
                initial_book_value: cells.money("initial_book_value"),
                age_years: cells.u32("age_years"),
                hectares: cells.decimal("hectares"),
                per_ha_rate: cells.money("per_ha_rate"),
                area_m2: cells.decimal("area_m2"),
                territorial_coefficient: cells.decimal("territorial_coefficient"),
                family_annual_income: cells.money("family_annual_income"),
                jurisdiction: Some(cells.string("jurisdiction")),
            };
            property_from_raw(*line, raw, cells.errors, config)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Municipalities
// ---------------------------------------------------------------------------

pub fn ingest_municipalities(path: &Path) -> Result<Ingested<Municipality>, CliError> {
    let text = read_file(path)?;
    let results: Vec<Result<Row<Municipality>, Rejection>> = if is_json(&text) {
        let raws: Vec<Municipality> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        raws.into_iter()
            .enumerate()
            .map(|(i, m)| municipality_row(i + 1, m, Vec::new()))
            .collect()
    } else {
        let table = read_csv(
            path,
            &text,
            &[
                "id", "kind", "coefficient_share", "revenue_t3", "revenue_t2", "revenue_t1",
                "revenue_forecast", "plan_year",
            ],
            &[
                "id", "kind", "coefficient_share", "revenue_t3", "revenue_t2", "revenue_t1",
                "revenue_forecast", "plan_year",
            ],
        )?;
        table
            .records
            .iter()
            .map(|(line, rec)| {
                let mut cells = Cells::new(&table.headers, rec);
                let kind = match cells.require("kind") {
                    Some(s) => parse_variant::<MunicipalityKind>(s).unwrap_or_else(|| {
                        cells
                            .errors
                            .push(format!("kind: expected city|municipality, got {s:?}"));
                        MunicipalityKind::City
                    }),
                    None => MunicipalityKind::City,
                };
                let municipality = Municipality {
                    id: cells.string("id"),
                    kind,
                    coefficient_share: cells.decimal("coefficient_share").unwrap_or(Decimal::ZERO),
                    own_revenue_actuals: [
                        cells.require_money("revenue_t3"),
                        cells.require_money("revenue_t2"),
                        cells.require_money("revenue_t1"),
                    ],
                    own_revenue_forecast_current: cells.require_money("revenue_forecast"),
                    plan_year: cells.i32("plan_year").unwrap_or(0),
                };
                let mut errors = cells.errors;
                if municipality.id.is_empty() {
                    errors.push("id: required".to_string());
                }
                municipality_row(*line, municipality, errors)
            })
            .collect()
    };
    let ingested = collect(results);
    validate_share_groups(&ingested.rows)?;
    Ok(ingested)
}

fn municipality_row(
    line: usize,
    m: Municipality,
    mut errors: Vec<String>,
) -> Result<Row<Municipality>, Rejection> {
    if !m.coefficient_share.within(Decimal::ZERO, Decimal::ONE) {
        errors.push(format!("coefficient_share: {} outside [0,1]", m.coefficient_share));
    }
    if m.own_revenue_actuals.iter().any(|v| v.is_negative())
        || m.own_revenue_forecast_current.is_negative()
    {
        errors.push("revenue: must not be negative".to_string());
    }
    let id = m.id.clone();
    finish(line, id, String::new(), false, m, errors, Vec::new())
}

/// Group-level check: within each kind, coefficient shares must sum to 1.
fn validate_share_groups(rows: &[Row<Municipality>]) -> Result<(), CliError> {
    for kind in [MunicipalityKind::City, MunicipalityKind::Municipality] {
        let group: Vec<&Row<Municipality>> =
            rows.iter().filter(|r| r.inner.kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        let sum: fiscal_core::Rational = group
            .iter()
            .map(|r| r.inner.coefficient_share.as_rational())
            .sum();
        let deviation = if sum >= fiscal_core::Rational::from_integer(1) {
            sum - fiscal_core::Rational::from_integer(1)
        } else {
            fiscal_core::Rational::from_integer(1) - sum
        };
        if deviation > fiscal_core::Rational::new(1, 1_000_000_000) {
            let ids: Vec<String> = group.iter().map(|r| r.inner.id.clone()).collect();
            return Err(CliError::validation(format!(
                "{kind} group shares sum to {}, expected 1: {}",
                Decimal::from_rational(sum),
                ids.join(", ")
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Revenue ledgers
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawLedgerEntry {
    tax_kind: Option<String>,
    amount: Option<Money>,
    jurisdiction: Option<String>,
    in_autonomous_republic: Option<bool>,
    // Extra fields from compute output (record, base, note) are accepted
    // and ignored so that liability lines round-trip as a ledger.
    record: Option<serde_json::Value>,
    base: Option<serde_json::Value>,
    note: Option<serde_json::Value>,
}

fn ledger_from_raw(line: usize, raw: RawLedgerEntry, mut errors: Vec<String>) -> Result<Row<LedgerEntry>, Rejection> {
    let tax_kind = match raw.tax_kind.as_deref() {
        None => {
            errors.push("tax_kind: required".to_string());
            TaxKind::Income
        }
        Some(s) => s.parse().unwrap_or_else(|e| {
            errors.push(format!("tax_kind: {e}"));
            TaxKind::Income
        }),
    };
    let amount = raw.amount.unwrap_or_else(|| {
        errors.push("amount: required".to_string());
        Money::ZERO
    });
    let entry = LedgerEntry {
        tax_kind,
        amount,
        jurisdiction: raw.jurisdiction.unwrap_or_default(),
        in_autonomous_republic: raw.in_autonomous_republic.unwrap_or(false),
    };
    if entry.amount.is_negative() {
        errors.push("amount: must not be negative".to_string());
    }
    let needs_jurisdiction = entry.tax_kind == TaxKind::Property
        || (entry.tax_kind == TaxKind::Income && entry.in_autonomous_republic);
    if needs_jurisdiction && entry.jurisdiction.is_empty() {
        errors.push(format!("jurisdiction: required for {} entries", entry.tax_kind));
    }
    let jurisdiction = entry.jurisdiction.clone();
    finish(line, String::new(), jurisdiction, entry.in_autonomous_republic, entry, errors, Vec::new())
}

pub fn ingest_ledger(path: &Path) -> Result<Ingested<LedgerEntry>, CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        // Either a bare array of entries or a compute report with "lines".
        let items = match &value {
            serde_json::Value::Array(items) => items.clone(),
            serde_json::Value::Object(map) => match map.get("lines") {
                Some(serde_json::Value::Array(items)) => items.clone(),
                _ => {
                    return Err(CliError::validation(format!(
                        "{}: expected an array of ledger entries or an object with \"lines\"",
                        path.display()
                    )))
                }
            },
            _ => {
                return Err(CliError::validation(format!(
                    "{}: expected an array of ledger entries",
                    path.display()
                )))
            }
        };
        let results = items
            .into_iter()
            .enumerate()
            .map(|(i, item)| {
                match serde_json::from_value::<RawLedgerEntry>(item) {
                    Ok(raw) => ledger_from_raw(i + 1, raw, Vec::new()),
                    Err(e) => Err(reject(i + 1, None, vec![e.to_string()])),
                }
            })
            .collect();
        return Ok(collect(results));
    }
    let table = read_csv(
        path,
        &text,
        &["tax_kind", "amount", "jurisdiction", "in_autonomous_republic"],
        &["tax_kind", "amount"],
    )?;
    let results = table
        .records
        .iter()
        .map(|(line, rec)| {
            let mut cells = Cells::new(&table.headers, rec);
            let raw = RawLedgerEntry {
                tax_kind: cells.require("tax_kind").map(str::to_string),
                amount: Some(cells.require_money("amount")),
                jurisdiction: Some(cells.string("jurisdiction")),
                in_autonomous_republic: Some(cells.bool_or("in_autonomous_republic", false)),
                record: None,
                base: None,
                note: None,
            };
            ledger_from_raw(*line, raw, cells.errors)
        })
        .collect();
    Ok(collect(results))
}

// ---------------------------------------------------------------------------
// Scenario incomes
// ---------------------------------------------------------------------------

pub fn ingest_incomes(path: &Path) -> Result<(Vec<Money>, Vec<Rejection>), CliError> {
    let text = read_file(path)?;
    if is_json(&text) {
        let incomes: Vec<Money> = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        return Ok((incomes, Vec::new()));
    }
    let table = read_csv(path, &text, &["id", "income"], &["income"])?;
    let mut incomes = Vec::new();
    let mut rejections = Vec::new();
    for (line, rec) in &table.records {
        let mut cells = Cells::new(&table.headers, rec);
        let income = cells.require_money("income");
        if cells.errors.is_empty() && !income.is_negative() {
            incomes.push(income);
        } else {
            let mut reasons = cells.errors;
            if income.is_negative() {
                reasons.push("income: must not be negative".to_string());
            }
            rejections.push(reject(*line, None, reasons));
        }
    }
    Ok((incomes, rejections))
}
