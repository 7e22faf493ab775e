import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { readBinaryFeatures, writeBinaryFeatures, writeCsvFeatures } from '../src/gcfv'

let dir: string

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'gcfv-'))
})

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true })
})

describe('binary format', () => {
  it('round-trips values and labels exactly', () => {
    const rows = [new Float32Array([1.5, -2.25, 0]), new Float32Array([3.125, 4, 5e-3])]
    const p = path.join(dir, 'a.gcfv')
    writeBinaryFeatures(p, rows, [0, 3])
    const back = readBinaryFeatures(p)
    expect(back.features.length).toBe(2)
    expect([...back.features[0]]).toEqual([...rows[0]])
    expect([...back.features[1]]).toEqual([...rows[1]])
    expect(back.labels).toEqual([0, 3])
  })

  it('writes the documented header layout', () => {
    const p = path.join(dir, 'b.gcfv')
    writeBinaryFeatures(p, [new Float32Array([7])], [1])
    const buf = fs.readFileSync(p)
    expect(buf.toString('ascii', 0, 4)).toBe('GCFV')
    expect(buf.readUInt8(4)).toBe(1) // version
    expect(buf.readUInt32LE(5)).toBe(1) // n_rows
    expect(buf.readUInt32LE(9)).toBe(1) // n_cols
    expect(buf.readUInt8(13)).toBe(1) // has_labels
    expect(buf.length).toBe(14 + 4 + 2)
  })

  it('rejects ragged rows, bad labels, and empty input', () => {
    const p = path.join(dir, 'c.gcfv')
    expect(() =>
      writeBinaryFeatures(p, [new Float32Array(2), new Float32Array(3)], null),
    ).toThrow(/row 2/)
    expect(() => writeBinaryFeatures(p, [new Float32Array(2)], [70000])).toThrow(/u16/)
    expect(() => writeBinaryFeatures(p, [], null)).toThrow(/no rows/)
  })

  it('rejects corrupted files', () => {
    const p = path.join(dir, 'd.gcfv')
    writeBinaryFeatures(p, [new Float32Array([1, 2])], null)
    const whole = fs.readFileSync(p)
    fs.writeFileSync(p, whole.subarray(0, whole.length - 3))
    expect(() => readBinaryFeatures(p)).toThrow(/size mismatch/)
    fs.writeFileSync(p, Buffer.concat([Buffer.from('XXXX'), whole.subarray(4)]))
    expect(() => readBinaryFeatures(p)).toThrow(/magic/)
  })
})

describe('csv format', () => {
  it('writes the documented header and one line per row', () => {
    const p = path.join(dir, 'a.csv')
    writeCsvFeatures(p, ['img_1', 'img_2'], [new Float32Array([1.5, 2]), new Float32Array([3, 4])], [0, 1])
    const lines = fs.readFileSync(p, 'utf-8').trim().split('\n')
    expect(lines[0]).toBe('id,f0,f1,label')
    expect(lines[1]).toBe('img_1,1.5,2,0')
    expect(lines.length).toBe(3)
  })

  it('omits the label column when labels are absent', () => {
    const p = path.join(dir, 'b.csv')
    writeCsvFeatures(p, ['x'], [new Float32Array([1])], null)
    expect(fs.readFileSync(p, 'utf-8').split('\n')[0]).toBe('id,f0')
  })
})
