// Minimal ambient typings for the subset of papaparse used here
// (the upstream package ships no type declarations).
declare module 'papaparse' {
    export interface ParseError {
        type: string;
        code: string;
        message: string;
        row?: number;
    }

    export interface ParseMeta {
        delimiter: string;
        linebreak: string;
        aborted: boolean;
        truncated: boolean;
        fields?: string[];
    }

    export interface ParseResult<T> {
        data: T[];
        errors: ParseError[];
        meta: ParseMeta;
    }

    export interface ParseConfig {
        header?: boolean;
        skipEmptyLines?: boolean | 'greedy';
        dynamicTyping?: boolean;
        delimiter?: string;
    }

    export function parse<T>(input: string, config?: ParseConfig): ParseResult<T>;

    const Papa: {
        parse<T>(input: string, config?: ParseConfig): ParseResult<T>;
    };
    export default Papa;
}
