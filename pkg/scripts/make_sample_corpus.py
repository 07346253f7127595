"""Regenerate the bundled synthetic document dump.

Writes src/healthlit/data/sample_documents.jsonl: short HTML-ish patient
education pages for the four sites, built from templates so that most
sentences contain at least one sample-lexicon phrase. Also mixes in titles,
hyperlinks and lexicon-free sentences so the snippet filter has work to do.

Usage:
  python scripts/make_sample_corpus.py [--docs 240] [--seed 2022]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

SITES = ["mayoclinic", "drugs", "medlineplus", "reddit"]
SITE_WEIGHTS = [0.45, 0.3, 0.1, 0.15]

CONDITIONS = ["asthma", "diabetes", "arthritis", "migraine", "gout", "anemia", "eczema", "bronchitis", "lupus", "psoriasis"]
DRUGS = ["ibuprofen", "metformin", "lisinopril", "amoxicillin", "prednisone", "warfarin", "naproxen", "atorvastatin"]
BODY = ["knee", "liver", "skin", "chest", "back", "throat", "lungs", "joints"]

TEMPLATES = [
    "Your physician may prescribe a medication to lower the risk of {cond} flares.",
    "Some people with {cond} notice fatigue and nausea during the first week.",
    "The test can't detect all cancers.",
    "Risk is high for people who smoke or have hypertension.",
    "Hypertension often has no symptoms, so your doctor will monitor your blood pressure.",
    "A blood test can detect renal problems before symptoms start.",
    "{Drug} can cause adverse effects such as nausea or dermatitis.",
    "Inflammation of the {body} is a common sign of {cond}.",
    "If you have chronic {cond}, adhere to the dosage your physician recommends.",
    "Take {drug} exactly as prescribed and never change the dosage on your own.",
    "However, if your family has one child with hypoplastic left heart syndrome, the risk of having another with a similar condition is increased.",
    "Your doctor may also take biopsies of the esophagus to look for inflammation.",
    "The lesion on your {body} is probably benign, but a biopsy can confirm it.",
    "A malignant lesion needs treatment as soon as possible.",
    "{Drug} is contraindicated in patients with hepatic disease.",
    "Edema in the legs can be a sign of cardiac or renal trouble.",
    "Call for help right away if you think someone is in cardiac arrest.",
    "A myocardial infarction happens when blood flow to the heart is blocked.",
    "Pulmonary problems can cause dyspnea even when you are resting.",
    "An analgesic such as {drug} can ease pain in the {body}.",
    "The nurse will administer the medication through an intravenous line.",
    "Apply the topical cream to the {body} twice a day.",
    "Most ambulatory patients recover within two weeks.",
    "The prognosis for acute {cond} is usually good with early care.",
    "A hemorrhage in the abdomen is an emergency.",
    "Insomnia and lethargy are common when you start {drug}.",
    "This condition can be hereditary, so ask your family about their health.",
    "Studies show the efficacy of {drug} in people with {cond}.",
    "People with a comorbidity such as diabetes face a higher risk of complications.",
    "Keep track of your symptoms and tell your physician about any changes.",
    "Pain in the abdomen with nausea may point to an acute problem.",
    "Tell your doctor about any adverse reaction to {drug}.",
]

PLAIN = [
    "Drink plenty of water every day.",
    "Most people feel better after a few days of rest.",
    "Ask your pharmacist if you have questions about {drug}.",
    "Keep all of your follow-up appointments.",
    "Wash your hands often during cold and flu season.",
]

TITLES = ["{Cond} overview", "Side effects", "Dosage guide", "When to see a doctor", "{Drug}", "Risk factors", "Chronic {cond}"]

LINKS = [
    "Read more at https://www.example.org/{cond} before your visit.",
    "See www.example.com/{drug} for the full list of risks.",
]


def fill(template: str, rng: random.Random) -> str:
    cond, drug, body = rng.choice(CONDITIONS), rng.choice(DRUGS), rng.choice(BODY)
    return template.format(
        cond=cond, Cond=cond.capitalize(), drug=drug, Drug=drug.capitalize(), body=body
    )


def make_doc(i: int, rng: random.Random) -> dict:
    site = rng.choices(SITES, SITE_WEIGHTS)[0]
    title = fill(rng.choice(TITLES), rng)
    paras = []
    sentences = [fill(t, rng) for t in rng.sample(TEMPLATES, rng.randint(3, 5))]
    sentences.append(fill(rng.choice(PLAIN), rng))
    if rng.random() < 0.3:
        sentences.append(fill(rng.choice(LINKS), rng))
    rng.shuffle(sentences)
    half = len(sentences) // 2
    paras.append(" ".join(sentences[:half]))
    paras.append(" ".join(sentences[half:]).replace(" & ", " &amp; "))
    heading = fill(rng.choice(TITLES), rng)
    body = f"<h2>{heading}.</h2>\n" + "\n".join(f"<p>{p}</p>" for p in paras)
    return {
        "id": f"{site}-{i:04d}",
        "source_site": site,
        "title": title,
        "body": body,
        "fetched_at": "2022-05-15T00:00:00Z",
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=240)
    ap.add_argument("--seed", type=int, default=2022)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/healthlit/data/sample_documents.jsonl"))
    args = ap.parse_args()

    rng = random.Random(args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(args.docs):
            fh.write(json.dumps(make_doc(i, rng), ensure_ascii=False) + "\n")
    print(f"wrote {args.docs} documents to {args.out}")


if __name__ == "__main__":
    main()
