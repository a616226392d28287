#!/usr/bin/env python3
"""Regenerates the bundled fixtures under crates/core/data/.

Outputs are deterministic: rerunning produces byte-identical files.

    python3 scripts/make_fixtures.py
"""

import hashlib
import json
import math
import os
import random

from fixture_entries import PAIRED, PLAIN, POLYSEMOUS

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA = os.path.join(ROOT, "crates", "core", "data")
SIDE = 24

RADICALS = """
上一 下一 丑一 东一 丽一 乐丿 书乙 云二 亮亠 人人 仇亻 仔亻 代亻 会人 伤亻 伪亻 低亻 信亻 假亻 傲亻
先儿 光儿 全人 兰八 关八 兴八 冰冫 冷冫 净冫 减冫 击凵 刀刀 刚刂 利刂 削刂 剑刂 功力 加力 劳力 勇力
勤力 华十 单十 危卩 厌厂 友又 发又 口口 古口 后口 吵口 和口 善口 喜口 喧口 嘴口 困囗 圆囗 土土 地土
坏土 坚土 城土 增土 复夂 大大 天大 失大 头大 奋大 好女 始女 学子 宁宀 安宀 实宀 家宀 容宀 宽宀 富宀
寒宀 对寸 小小 少小 尾尸 山山 师巾 干干 平干 广广 床广 开廾 弓弓 张弓 弱弓 强弓 当彐 心心 快忄 思心
急心 怯忄 恶心 悲心 情忄 惰忄 意心 愚心 慢忄 慧心 懒忄 懦忄 成戈 手手 打扌 挫扌 提扌 故攵 敌攵 教攵
敢攵 散攵 文文 新斤 方方 日日 时日 明日 昏日 易日 星日 春日 是日 暖日 暗日 月月 有月 朋月 望月 朝月
末木 本木 杂木 村木 束木 杯木 松木 林木 柔木 树木 桃木 桌木 桥木 梅木 欢欠 歌欠 止止 正止 步止 武止
歪止 水水 江氵 污氵 河氵 油氵 洁氵 浅氵 浊氵 海氵 淡氵 深氵 添氵 清氵 温氵 湖氵 满氵 漂氵 漠氵 火火
灯火 点灬 热灬 熊灬 熟灬 爱爫 牛牛 犬犬 狗犭 狭犭 猫犭 玉玉 现王 琴王 瓜瓜 生生 田田 电田 疑疋 病疒
白白 盐皿 盛皿 看目 眼目 真目 短矢 石石 硬石 碗石 秋禾 秽禾 穷穴 空穴 窄穴 窗穴 竹竹 笔竹 笨竹 简竹
管竹 米米 粗米 糖米 繁糸 纸纟 细纟 终纟 结纟 绵纟 羊羊 美羊 老老 耳耳 聪耳 肉肉 肮月 胆月 胜月 脏月
脚月 自自 舟舟 节艹 花艹 英艹 茶艹 草艹 荷艹 菊艹 落艹 虎虍 虚虍 虫虫 蛮虫 蠢虫 行行 衣衣 衰衣 裕衤
西西 要西 角角 认讠 讨讠 诗讠 诚讠 谦讠 豆豆 败贝 贫贝 走走 起走 足足 路足 车车 软车 轻车 过辶 进辶
退辶 逊辶 通辶 道辶 酒酉 重里 野里 金金 钟钅 钱钅 铁钅 银钅 长长 门门 闹门 阔门 陋阝 险阝 难隹 雨雨
雪雨 雷雨 静青 非非 面面 风风 饭饣 马马 骄马 高高 鱼鱼 鸟鸟 鸡鸟 麦麦 黑黑 龙龙
"""

POSITIVE = ["美丽", "漂亮", "快乐", "高兴", "勇敢", "聪明", "勤劳", "温暖", "干净", "富有",
            "成功", "坚强", "诚实", "谦虚", "热情", "明亮", "友好", "认真", "细心", "进步"]
NEGATIVE = ["丑陋", "难看", "悲伤", "难过", "胆小", "愚蠢", "懒惰", "寒冷", "肮脏", "贫穷",
            "失败", "软弱", "虚伪", "骄傲", "冷淡", "黑暗", "粗心", "马虎", "退步", "危险"]
TEMPLATES = ["他是一个{}的人", "大家都说这里很{}", "那天的情形十分{}", "我觉得她很{}"]


def radical_table():
    pairs = RADICALS.split()
    table = {}
    for p in pairs:
        assert len(p) == 2, p
        assert p[0] not in table, p
        table[p[0]] = p[1]
    return table


def entries():
    out = []
    for surface, senses, syn, ant in POLYSEMOUS:
        out.append({
            "entry": surface,
            "senses": [{"definition": d, "examples": ex} for d, ex in senses],
            "synonyms": syn,
            "antonyms": ant,
        })
    for surface, definition, example, syn, ant in PAIRED:
        out.append({
            "entry": surface,
            "senses": [{"definition": definition, "examples": [example] if example else []}],
            "synonyms": syn,
            "antonyms": ant,
        })
    for surface, definition, example in PLAIN:
        out.append({
            "entry": surface,
            "senses": [{"definition": definition, "examples": [example] if example else []}],
            "synonyms": [],
            "antonyms": [],
        })
    seen = set()
    for e in out:
        assert e["entry"] not in seen, e["entry"]
        seen.add(e["entry"])
        assert e["entry"] not in e["synonyms"] + e["antonyms"], e["entry"]
        defs = [s["definition"] for s in e["senses"]]
        assert len(set(defs)) == len(defs), e["entry"]
        for s in e["senses"]:
            for x in s["examples"]:
                assert e["entry"] in x, (e["entry"], x)
    return out


def write_dictionary(records, radicals):
    path = os.path.join(DATA, "toy_dict.jsonl")
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            if len(r["entry"]) == 1 and r["entry"] in radicals:
                r = dict(r, radical=radicals[r["entry"]])
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_radicals(radicals):
    with open(os.path.join(DATA, "radicals.tsv"), "w", encoding="utf-8") as f:
        for ch in sorted(radicals):
            f.write(f"{ch}\t{radicals[ch]}\n")


def seeded(key):
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def draw_segment(canvas, x0, y0, x1, y1, width):
    steps = int(max(abs(x1 - x0), abs(y1 - y0)) * 3) + 1
    for i in range(steps + 1):
        t = i / steps
        cx, cy = x0 + (x1 - x0) * t, y0 + (y1 - y0) * t
        for y in range(SIDE):
            for x in range(SIDE):
                d = math.hypot(x + 0.5 - cx, y + 0.5 - cy)
                v = max(0.0, 1.0 - max(0.0, d - width) / 0.8)
                canvas[y][x] = max(canvas[y][x], v)


def strokes(rng, box, count):
    x0, y0, x1, y1 = box
    out = []
    for _ in range(count):
        kind = rng.choice("hvdd")
        if kind == "h":
            y = rng.uniform(y0, y1)
            out.append((x0 + rng.uniform(0, 2), y, x1 - rng.uniform(0, 2), y))
        elif kind == "v":
            x = rng.uniform(x0, x1)
            out.append((x, y0 + rng.uniform(0, 2), x, y1 - rng.uniform(0, 2)))
        else:
            out.append((rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(x0, x1), rng.uniform(y0, y1)))
    return out


def glyph(ch, radical):
    """Radical strokes in a fixed region plus per-character strokes elsewhere."""
    canvas = [[0.0] * SIDE for _ in range(SIDE)]
    if radical is None or radical == ch:
        parts = [((3, 3, 21, 21), seeded("char:" + ch), 5)]
    else:
        layout = seeded("layout:" + radical).choice(["left", "top"])
        if layout == "left":
            rbox, cbox = (2, 3, 9, 21), (11, 3, 22, 21)
        else:
            rbox, cbox = (3, 2, 21, 9), (3, 11, 21, 22)
        parts = [(rbox, seeded("radical:" + radical), 3), (cbox, seeded("char:" + ch), 4)]
    for box, rng, count in parts:
        for seg in strokes(rng, box, count):
            draw_segment(canvas, *seg, width=0.6)
    return [[int(round(255 * v)) for v in row] for row in canvas]


def write_atlas(chars, radicals):
    lines = [f"GLYPH v1 {SIDE} {len(chars)}"]
    for ch in chars:
        g = glyph(ch, radicals.get(ch))
        assert any(v > 0 for row in g for v in row), ch
        lines.append(ch)
        lines.extend(" ".join(str(v) for v in row) for row in g)
    with open(os.path.join(DATA, "glyphs.atlas"), "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_fusion_task():
    rows = []
    for words, label in ((POSITIVE, 1), (NEGATIVE, 0)):
        for i, w in enumerate(words):
            rows.append({"text": TEMPLATES[i % len(TEMPLATES)].format(w), "label": label})
    rng = random.Random(11)
    rng.shuffle(rows)
    with open(os.path.join(DATA, "fusion_task.jsonl"), "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    os.makedirs(DATA, exist_ok=True)
    radicals = radical_table()
    records = entries()
    write_dictionary(records, radicals)
    write_radicals(radicals)
    singles = [r["entry"] for r in records if len(r["entry"]) == 1]
    write_atlas(singles, radicals)
    write_fusion_task()
    multi = sum(1 for r in records if len(r["senses"]) >= 2)
    print(f"{len(records)} entries ({multi} polysemous), {len(radicals)} radicals, {len(singles)} glyphs")


if __name__ == "__main__":
    main()
