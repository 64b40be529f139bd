/**
 * Figure builders: CSV artifacts in, echarts option trees out.
 *
 * Four figure kinds mirror the pipeline's standard plots: the filter
 * shape, the spectrum with the filter response overlaid, the
 * measurement-vs-DD chi/W scan comparison, and the non-Gaussianity
 * witness curves (|W| with its Gaussian-truncation prediction, Im W).
 */
import type { EChartsOption } from 'echarts';
import { ContractViolation, Table, column, readTable, textColumn } from './csv.js';

export const FIGURE_KINDS = ['filter', 'spectrum_overlay', 'scan_compare', 'witness_curves'] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

function finitePairs(x: number[], y: number[]): [number, number][] {
    const out: [number, number][] = [];
    for (let i = 0; i < x.length; i++) {
        if (Number.isFinite(x[i]) && Number.isFinite(y[i])) out.push([x[i], y[i]]);
    }
    return out;
}

function filterFigure(files: string[]): EChartsOption {
    if (files.length < 1 || files.length > 2) {
        throw new ContractViolation(
            'filter figure needs filter_breakpoints.csv and optionally filter_power.csv'
        );
    }
    const bp = readTable(files[0], 'filter_breakpoints');
    const t = column(bp, 't', files[0]);
    const f = column(bp, 'f', files[0]);
    const option: EChartsOption = {
        title: { text: 'Filter f(t)' },
        grid: files.length === 2 ? [{ bottom: '55%' }, { top: '55%' }] : undefined,
        xAxis: [{ type: 'value', name: 't', gridIndex: 0 }],
        yAxis: [{ type: 'value', name: 'f', gridIndex: 0, min: -1.2, max: 1.2 }],
        series: [
            {
                type: 'line',
                step: 'end',
                symbol: 'none',
                data: finitePairs(t, f),
                xAxisIndex: 0,
                yAxisIndex: 0,
            },
        ],
    };
    if (files.length === 2) {
        const power = readTable(files[1], 'filter_power');
        const omega = column(power, 'omega', files[1]);
        const f2 = column(power, 'f2', files[1]);
        (option.xAxis as object[]).push({ type: 'value', name: 'omega', gridIndex: 1 });
        (option.yAxis as object[]).push({ type: 'value', name: '|f~|^2', gridIndex: 1 });
        (option.series as object[]).push({
            type: 'line',
            symbol: 'none',
            data: finitePairs(omega, f2),
            xAxisIndex: 1,
            yAxisIndex: 1,
        });
    }
    return option;
}

function spectrumOverlayFigure(files: string[]): EChartsOption {
    if (files.length !== 2) {
        throw new ContractViolation('spectrum_overlay needs spectrum.csv and filter_power.csv');
    }
    const spectrum = readTable(files[0], 'spectrum');
    const power = readTable(files[1], 'filter_power');
    const sOmega = column(spectrum, 'omega', files[0]);
    const s = column(spectrum, 'S', files[0]);
    const fOmega = column(power, 'omega', files[1]);
    const f2 = column(power, 'f2', files[1]);
    return {
        title: { text: 'Spectrum and filter response' },
        legend: { data: ['S(omega)', '|f~(omega)|^2'], top: 28 },
        xAxis: { type: 'value', name: 'omega' },
        yAxis: [
            { type: 'value', name: 'S' },
            { type: 'value', name: '|f~|^2' },
        ],
        series: [
            { name: 'S(omega)', type: 'line', symbol: 'none', data: finitePairs(sOmega, s) },
            {
                name: '|f~(omega)|^2',
                type: 'line',
                symbol: 'none',
                yAxisIndex: 1,
                data: finitePairs(fOmega, f2),
            },
        ],
    };
}

/** Accept both the 3-column chi-scan and 4-column scan contracts. */
function readScan(path: string): { omega: number[]; chi: number[]; w: number[] } {
    let table: Table;
    try {
        table = readTable(path, 'scan');
    } catch {
        table = readTable(path, 'chi_scan');
    }
    return {
        omega: column(table, 'omega_p', path),
        chi: column(table, 'chi', path),
        w: column(table, 'W', path),
    };
}

function scanCompareFigure(files: string[]): EChartsOption {
    if (files.length !== 2) {
        throw new ContractViolation(
            'scan_compare needs two scan CSVs (measurement first, DD second)'
        );
    }
    const meas = readScan(files[0]);
    const dd = readScan(files[1]);
    const chiSeries = (scan: { omega: number[]; chi: number[] }, name: string) => ({
        name,
        type: 'line' as const,
        symbol: 'none' as const,
        data: finitePairs(scan.omega, scan.chi).filter(([, y]) => y > 0),
        xAxisIndex: 0,
        yAxisIndex: 0,
    });
    const wSeries = (scan: { omega: number[]; w: number[] }, name: string) => ({
        name,
        type: 'line' as const,
        symbol: 'none' as const,
        data: finitePairs(scan.omega, scan.w),
        xAxisIndex: 1,
        yAxisIndex: 1,
    });
    return {
        title: { text: 'Decoherence vs comb frequency: measurement and DD' },
        legend: { data: ['measurement', 'DD'], top: 28 },
        grid: [{ bottom: '55%' }, { top: '55%' }],
        xAxis: [
            { type: 'value', name: 'omega_p', gridIndex: 0 },
            { type: 'value', name: 'omega_p', gridIndex: 1 },
        ],
        yAxis: [
            { type: 'log', name: 'chi', gridIndex: 0 },
            { type: 'value', name: 'W', gridIndex: 1, min: 0, max: 1 },
        ],
        series: [
            chiSeries(meas, 'measurement'),
            chiSeries(dd, 'DD'),
            wSeries(meas, 'measurement'),
            wSeries(dd, 'DD'),
        ],
    };
}

function witnessFigure(files: string[]): EChartsOption {
    if (files.length !== 1) {
        throw new ContractViolation('witness_curves needs exactly one witness CSV');
    }
    const table = readTable(files[0], 'witness');
    const t = column(table, 'T', files[0]);
    const re = column(table, 're_W', files[0]);
    const im = column(table, 'im_W', files[0]);
    const gauss = column(table, 'W_gauss2', files[0]);
    const verdicts = textColumn(table, 'verdict', files[0]);
    const absW = re.map((r, i) => Math.hypot(r, im[i]));
    const detected = finitePairs(t, im).filter((_, i) => verdicts[i] === 'non_gaussian_detected');
    return {
        title: { text: 'Non-Gaussianity witness vs total sequence time' },
        legend: { data: ['|W|', 'Gaussian truncation', 'Im W'], top: 28 },
        grid: [{ bottom: '55%' }, { top: '55%' }],
        xAxis: [
            { type: 'log', name: 'T', gridIndex: 0 },
            { type: 'log', name: 'T', gridIndex: 1 },
        ],
        yAxis: [
            { type: 'value', name: '|W|', gridIndex: 0, min: 0, max: 1 },
            { type: 'value', name: 'Im W', gridIndex: 1 },
        ],
        series: [
            { name: '|W|', type: 'line', data: finitePairs(t, absW), xAxisIndex: 0, yAxisIndex: 0 },
            {
                name: 'Gaussian truncation',
                type: 'line',
                lineStyle: { type: 'dashed' },
                symbol: 'none',
                data: finitePairs(t, gauss),
                xAxisIndex: 0,
                yAxisIndex: 0,
            },
            { name: 'Im W', type: 'line', data: finitePairs(t, im), xAxisIndex: 1, yAxisIndex: 1 },
            {
                name: 'detected',
                type: 'scatter',
                symbolSize: 10,
                data: detected,
                xAxisIndex: 1,
                yAxisIndex: 1,
            },
        ],
    };
}

export function buildFigure(kind: string, files: string[]): EChartsOption {
    switch (kind) {
        case 'filter':
            return filterFigure(files);
        case 'spectrum_overlay':
            return spectrumOverlayFigure(files);
        case 'scan_compare':
            return scanCompareFigure(files);
        case 'witness_curves':
            return witnessFigure(files);
        default:
            throw new ContractViolation(
                `unknown figure kind '${kind}' (expected one of ${FIGURE_KINDS.join(', ')})`
            );
    }
}
