#!/usr/bin/env node
/**
 * render_figure <kind> <csv...> -o <out.svg>
 *
 * Reads CSV artifacts, validates their header contracts, and writes an
 * SVG figure. Exits 1 on any contract violation or bad invocation.
 */
import { realpathSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';
import { ContractViolation } from './csv.js';
import { FIGURE_KINDS, buildFigure } from './figures.js';
import { renderToFile } from './render.js';

function usage(): string {
    return (
        `usage: render_figure <kind> <csv...> -o <out.svg> [--width N] [--height N]\n` +
        `  kinds: ${FIGURE_KINDS.join(', ')}`
    );
}

export function main(argv: string[]): number {
    let parsed;
    try {
        parsed = parseArgs({
            args: argv,
            options: {
                output: { type: 'string', short: 'o' },
                width: { type: 'string' },
                height: { type: 'string' },
            },
            allowPositionals: true,
        });
    } catch (err) {
        process.stderr.write(`error: ${(err as Error).message}\n${usage()}\n`);
        return 1;
    }
    const { values, positionals } = parsed;
    if (positionals.length < 2 || !values.output) {
        process.stderr.write(`${usage()}\n`);
        return 1;
    }
    const [kind, ...files] = positionals;
    const width = values.width ? Number(values.width) : undefined;
    const height = values.height ? Number(values.height) : undefined;
    if ((width !== undefined && !(width > 0)) || (height !== undefined && !(height > 0))) {
        process.stderr.write('error: --width/--height must be positive numbers\n');
        return 1;
    }
    try {
        const option = buildFigure(kind, files);
        renderToFile(option, values.output, { width, height });
    } catch (err) {
        if (err instanceof ContractViolation) {
            process.stderr.write(`contract violation: ${err.message}\n`);
            return 1;
        }
        process.stderr.write(`error: ${(err as Error).message}\n`);
        return 2;
    }
    process.stdout.write(`wrote ${values.output}\n`);
    return 0;
}

const entry = process.argv[1] ? pathToFileURL(realpathSync(process.argv[1])).href : '';
if (import.meta.url === entry) {
    process.exit(main(process.argv.slice(2)));
}
