/**
 * Dataset assembly from an augmentation run directory.
 *
 * Two layouts are understood:
 *   - a run with manifest.jsonl (augmented views + shared targets/labels);
 *   - a plain triple of images/, targets/, labels/ keyed by stem (used for
 *     the no-augmentation baseline, where each image is its own single view).
 */

import * as fs from "fs";
import * as path from "path";

import { ImageTensor, readMask, readPng } from "./png";
import { NpyArray, readNpy } from "./npy";

export interface Sample {
  parent: string;
  image: ImageTensor;
  psi: NpyArray; // (H, W, C) saliency target shared by the parent's views
  mask: Float32Array; // (H*W) binary labels
}

interface ManifestRecord {
  parent: string;
  image: string;
  saliency: string;
  label: string | null;
}

export function loadRunDir(dir: string): Sample[] {
  const manifest = path.join(dir, "manifest.jsonl");
  if (fs.existsSync(manifest)) {
    return loadFromManifest(dir, manifest);
  }
  return loadPlainTriple(dir);
}

function loadFromManifest(dir: string, manifestPath: string): Sample[] {
  const lines = fs
    .readFileSync(manifestPath, "utf-8")
    .split("\n")
    .filter((l) => l.trim().length > 0);
  const psiCache = new Map<string, NpyArray>();
  const maskCache = new Map<string, Float32Array>();
  const samples: Sample[] = [];
  for (const line of lines) {
    const rec = JSON.parse(line) as ManifestRecord;
    if (rec.label === null) {
      throw new Error(`record for ${rec.parent} has no label; trainer needs labelled runs`);
    }
    if (!psiCache.has(rec.parent)) {
      psiCache.set(rec.parent, readNpy(path.join(dir, rec.saliency)));
      maskCache.set(rec.parent, readMask(path.join(dir, rec.label)));
    }
    samples.push({
      parent: rec.parent,
      image: readPng(path.join(dir, rec.image)),
      psi: psiCache.get(rec.parent)!,
      mask: maskCache.get(rec.parent)!,
    });
  }
  if (samples.length === 0) throw new Error(`${manifestPath} holds no records`);
  return samples;
}

function loadPlainTriple(dir: string): Sample[] {
  const imagesDir = path.join(dir, "images");
  const targetsDir = path.join(dir, "targets");
  const labelsDir = path.join(dir, "labels");
  for (const d of [imagesDir, targetsDir, labelsDir]) {
    if (!fs.existsSync(d)) {
      throw new Error(`${dir} has neither manifest.jsonl nor an ${path.basename(d)}/ directory`);
    }
  }
  const stems = fs
    .readdirSync(imagesDir)
    .filter((f) => f.endsWith(".png"))
    .map((f) => f.replace(/\.png$/, ""))
    .sort();
  if (stems.length === 0) throw new Error(`no images in ${imagesDir}`);
  return stems.map((stem) => ({
    parent: stem,
    image: readPng(path.join(imagesDir, `${stem}.png`)),
    psi: readNpy(path.join(targetsDir, `${stem}.npy`)),
    mask: readMask(path.join(labelsDir, `${stem}.png`)),
  }));
}

/** Deterministic 1:1 split by parent image (not by view). */
export function splitByParent(samples: Sample[]): { train: Sample[]; val: Sample[] } {
  const parents = [...new Set(samples.map((s) => s.parent))].sort();
  const trainParents = new Set(parents.filter((_, i) => i % 2 === 0));
  return {
    train: samples.filter((s) => trainParents.has(s.parent)),
    val: samples.filter((s) => !trainParents.has(s.parent)),
  };
}
