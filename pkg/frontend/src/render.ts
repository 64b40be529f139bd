/** Server-side SVG rendering of figure options via echarts SSR mode. */
import { writeFileSync } from 'node:fs';
import * as echarts from 'echarts';
import type { EChartsOption } from 'echarts';

export interface RenderOptions {
    width?: number;
    height?: number;
}

export function renderSvg(option: EChartsOption, opts: RenderOptions = {}): string {
    const chart = echarts.init(null, null, {
        renderer: 'svg',
        ssr: true,
        width: opts.width ?? 900,
        height: opts.height ?? 600,
    });
    try {
        chart.setOption({ animation: false, ...option });
        return chart.renderToSVGString();
    } finally {
        chart.dispose();
    }
}

export function renderToFile(option: EChartsOption, outPath: string, opts: RenderOptions = {}): void {
    writeFileSync(outPath, renderSvg(option, opts), 'utf-8');
}
