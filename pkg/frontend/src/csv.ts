/**
 * Strict CSV ingestion for the simulation pipeline's artifacts.
 *
 * The header of every CSV is a versioned contract; any drift (missing,
 * renamed, extra or reordered columns) must fail loudly before a figure
 * is produced, naming the offending column.
 */
import { readFileSync } from 'node:fs';
import Papa from 'papaparse';

export class ContractViolation extends Error {}

/** Known header contracts, keyed by artifact name. */
export const HEADERS = {
    filter_breakpoints: ['t', 'f'],
    filter_power: ['omega', 'f2'],
    spectrum: ['omega', 'S'],
    chi_scan: ['omega_p', 'chi', 'W'],
    scan: ['omega_p', 'chi', 'W', 'mode'],
    witness: ['T', 're_W', 'im_W', 'se_re', 'se_im', 'W_gauss2', 'verdict'],
    correlators: ['name', 're_mean', 'im_mean', 'std_error', 'n_traj'],
} as const;

export type ArtifactKind = keyof typeof HEADERS;

export interface Table {
    columns: string[];
    rows: Record<string, string>[];
}

/** Columns that hold text rather than numbers. */
const TEXT_COLUMNS = new Set(['mode', 'verdict', 'name']);

function checkHeader(actual: string[], expected: readonly string[], path: string): void {
    for (let i = 0; i < Math.max(actual.length, expected.length); i++) {
        if (i >= expected.length) {
            throw new ContractViolation(
                `${path}: unexpected column '${actual[i]}' (header contract is ${expected.join(',')})`
            );
        }
        if (i >= actual.length || actual[i] !== expected[i]) {
            throw new ContractViolation(
                `${path}: expected column '${expected[i]}' at position ${i + 1}, ` +
                `found '${actual[i] ?? '<missing>'}'`
            );
        }
    }
}

/** Parse one CSV file and validate its header against a contract. */
export function readTable(path: string, kind: ArtifactKind): Table {
    let text: string;
    try {
        text = readFileSync(path, 'utf-8');
    } catch (err) {
        throw new ContractViolation(`${path}: cannot read file (${(err as Error).message})`);
    }
    const parsed = Papa.parse<Record<string, string>>(text.trim(), {
        header: true,
        skipEmptyLines: true,
    });
    if (parsed.errors.length > 0) {
        throw new ContractViolation(`${path}: parse error: ${parsed.errors[0].message}`);
    }
    const columns = parsed.meta.fields ?? [];
    checkHeader(columns, HEADERS[kind], path);
    if (parsed.data.length === 0) {
        throw new ContractViolation(`${path}: no data rows`);
    }
    return { columns, rows: parsed.data };
}

/** Numeric column extraction; 'inf' maps to Infinity (unmeasurable points). */
export function column(table: Table, name: string, path = '<table>'): number[] {
    if (!table.columns.includes(name)) {
        throw new ContractViolation(`${path}: no column '${name}'`);
    }
    if (TEXT_COLUMNS.has(name)) {
        throw new ContractViolation(`${path}: column '${name}' is not numeric`);
    }
    return table.rows.map((row, i) => {
        const raw = row[name];
        if (raw === 'inf') return Infinity;
        if (raw === '-inf') return -Infinity;
        const value = Number(raw);
        if (raw === '' || raw === undefined || Number.isNaN(value)) {
            throw new ContractViolation(
                `${path}: row ${i + 2}, column '${name}': not a number ('${raw}')`
            );
        }
        return value;
    });
}

export function textColumn(table: Table, name: string, path = '<table>'): string[] {
    if (!table.columns.includes(name)) {
        throw new ContractViolation(`${path}: no column '${name}'`);
    }
    return table.rows.map((row) => row[name]);
}
