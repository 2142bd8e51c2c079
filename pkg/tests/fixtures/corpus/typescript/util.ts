/** Formats a byte count as a short human readable size string. */
export function formatSize(bytes: number): string {
  const units = ["B", "KB", "MB"];
  let u = 0;
  let v = bytes;
  while (v >= 1024 && u < units.length - 1) {
    v /= 1024;
    u += 1;
  }
  return `${v.toFixed(1)} ${units[u]}`;
}

export function unformatted(x: number): number {
  return x + 1;
}
