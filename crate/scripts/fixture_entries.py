# Headword data for the bundled toy dictionary.
#
# Each entry: (surface, [(definition, [examples...]), ...], [synonyms], [antonyms])

POLYSEMOUS = [
    ("打", [("用手或器具撞击物体", ["鼓手用力打鼓"]),
            ("从事某种工作", ["他进城打工赚钱"]),
            ("用线编织衣物", ["奶奶给我打毛衣"])], ["击"], []),
    ("开", [("使关闭的东西不再关闭", ["请把窗户打开"]),
            ("花朵绽放", ["春天桃花开了"]),
            ("驾驶车辆或机器", ["他会开汽车"])], [], ["关"]),
    ("花", [("植物的繁殖器官，颜色鲜艳", ["园中的花很香"]),
            ("用掉钱财或时间", ["买书花了十元"]),
            ("眼睛看东西模糊", ["老人眼睛花了"])], [], []),
    ("道", [("供人行走的路", ["山间有一条小道"]),
            ("说，讲", ["他笑道不必客气"]),
            ("事物的规律和道理", ["君子爱财取之有道"])], ["路"], []),
    ("生", [("出生，降生", ["她生在南方小镇"]),
            ("食物没有煮熟", ["这块肉还是生的"]),
            ("不熟悉的", ["人生地不熟"])], [], ["熟"]),
    ("行", [("走路，步行", ["三人行必有我师"]),
            ("可以，同意", ["这样做行不行"]),
            ("能干，有本领", ["他做菜真行"])], ["走"], []),
    ("长", [("两端之间距离大", ["这条河很长"]),
            ("生长，成长", ["小树长高了"]),
            ("年纪最大的，排行第一", ["他是家中长子"])], [], ["短"]),
    ("白", [("像雪一样的颜色", ["白云飘在天上"]),
            ("没有效果，徒然", ["这趟算是白跑了"]),
            ("说明，陈述", ["他向大家表白心意"])], [], ["黑"]),
    ("老", [("年纪大", ["老人坐在门口晒太阳"]),
            ("陈旧的，时间久的", ["这是一座老房子"]),
            ("经常，总是", ["他老是迟到"])], [], ["少"]),
    ("好", [("优点多，使人满意", ["这本书写得好"]),
            ("容易", ["这道题好做"]),
            ("喜爱", ["他自幼好读书"])], [], ["坏"]),
    ("明", [("光线充足，亮", ["月明星稀"]),
            ("清楚，明白", ["事情已经明了"]),
            ("次于今天或今年的", ["明天再来找你"])], ["亮"], ["暗"]),
    ("发", [("送出，交付", ["他给朋友发信"]),
            ("产生，长出", ["种子发芽了"]),
            ("人的头发", ["她一头黑发"])], [], []),
    ("过", [("从一处到另一处，经过", ["我们过了一座桥"]),
            ("超出限度", ["他高兴过了头"]),
            ("表示曾经发生", ["我去过北京"])], [], []),
    ("深", [("从上到下距离大", ["这口井很深"]),
            ("颜色浓", ["她穿深红色衣服"]),
            ("感情厚，程度高", ["他们的感情很深"])], [], ["浅"]),
    ("快", [("速度高，用时短", ["他跑得很快"]),
            ("愉快，舒畅", ["大家心中畅快"]),
            ("将要，接近", ["天快黑了"])], [], ["慢"]),
    ("重", [("分量大", ["这箱书很重"]),
            ("要紧，重要", ["此事责任重大"]),
            ("再一次，重新", ["请重写一遍"])], [], ["轻"]),
    ("点", [("细小的痕迹", ["纸上有个黑点"]),
            ("引火使燃烧", ["他点了一支蜡烛"]),
            ("指定，指名", ["老师点名叫他"])], [], []),
    ("看", [("使视线接触人或物", ["他在灯下看书"]),
            ("探望，问候", ["周末去看奶奶"]),
            ("认为，判断", ["我看这事能成"])], ["望"], []),
    ("走", [("人或鸟兽的脚交互向前移动", ["他步行走到学校"]),
            ("离开，去", ["客人已经走了"]),
            ("泄露出去", ["消息走漏了"])], ["行"], []),
    ("上", [("位置在高处", ["鸟在树上唱歌"]),
            ("由低处到高处", ["我们上山砍柴"]),
            ("次序或时间在前的", ["上个月很忙"])], [], ["下"]),
    ("下", [("位置在低处", ["猫躲在桌下"]),
            ("降落", ["外面下雨了"]),
            ("次序或时间在后的", ["下周就要考试"])], [], ["上"]),
    ("高", [("从下到上距离大", ["这座楼很高"]),
            ("等级在上的", ["他读高年级"]),
            ("声音响亮", ["她高声歌唱"])], [], ["低"]),
    ("清", [("水或气体纯净透明", ["河水很清"]),
            ("明白，清楚", ["我说清了原因"]),
            ("朝代名，最后一个封建王朝", ["清朝的服饰很特别"])], [], ["浊"]),
    ("轻", [("分量小", ["羽毛很轻"]),
            ("程度浅", ["他受了轻伤"]),
            ("不重视，随便", ["不要轻视对手"])], [], ["重"]),
    ("光", [("照耀在物体上使能看见的东西", ["阳光照进屋里"]),
            ("一点不剩", ["饭都吃光了"]),
            ("荣誉", ["运动员为国争光"])], [], []),
    ("口", [("人和动物吃东西发声的器官", ["他张口说话"]),
            ("出入通过的地方", ["我在门口等你"]),
            ("用于计算人数的量词", ["家里有五口人"])], ["嘴"], []),
    ("面", [("头的前部，脸", ["他满面笑容"]),
            ("物体的表层", ["桌面很平"]),
            ("用粮食粉做成的条状食品", ["中午吃了一碗面"])], [], []),
    ("头", [("人身最上部或动物最前部", ["他摇了摇头"]),
            ("物体的顶端", ["山头上有座塔"]),
            ("为首的人", ["他是这伙人的头"])], [], ["尾"]),
    ("手", [("人体上肢前端能拿东西的部分", ["他举起右手"]),
            ("擅长某种技能的人", ["他是画画的好手"]),
            ("亲自动手做的", ["这是他手写的信"])], [], ["脚"]),
    ("心", [("思想感情", ["她心里很高兴"]),
            ("中央，中心", ["小船漂在湖心"]),
            ("推动血液循环的器官", ["医生听他的心跳"])], [], []),
    ("水", [("无色无味的透明液体", ["我喝了一杯水"]),
            ("河流的通称", ["汉水流过这座城"]),
            ("内容空泛，质量差", ["这篇文章太水了"])], [], ["火"]),
    ("火", [("物体燃烧时发出的光焰", ["炉中的火很旺"]),
            ("发怒，生气", ["他一听就火了"]),
            ("兴旺，热闹", ["这家店生意很火"])], [], ["水"]),
    ("东", [("太阳升起的方向", ["太阳从东边升起"]),
            ("主人", ["今天我做东请客"])], [], ["西"]),
    ("风", [("空气流动的现象", ["今天风很大"]),
            ("社会上长期形成的习俗", ["这里民风淳朴"])], [], []),
    ("书", [("装订成册的著作", ["桌上放着一本书"]),
            ("写字，记录", ["他挥笔书写对联"]),
            ("书信", ["家书抵万金"])], [], []),
    ("信", [("按照习惯格式写给人的话", ["他给母亲写信"]),
            ("相信，认为真实", ["我信你说的话"]),
            ("诚实，不欺骗", ["人无信不立"])], [], ["疑"]),
    ("学", [("学习知识技能", ["他在学画画"]),
            ("学校", ["孩子该上学了"])], [], ["教"]),
    ("会", [("聚合，见面", ["我们在村口会合"]),
            ("懂得怎样做或有能力做", ["他会游泳"]),
            ("有一定目的的集会", ["明天下午开会"])], [], []),
    ("要", [("希望得到", ["孩子要一个苹果"]),
            ("应该，必须", ["你要好好学习"]),
            ("重要的", ["这是一件要事"])], [], []),
    ("正", [("不偏不斜", ["这幅画挂正了"]),
            ("恰好，刚好", ["我正要出门"]),
            ("纯正，不杂", ["这茶的味道很正"])], [], ["歪"]),
    ("平", [("表面没有高低凹凸", ["这里的地面很平"]),
            ("安定，安宁", ["天下太平"]),
            ("比赛不分胜负", ["两队踢平了"])], [], []),
    ("方", [("四个角都是直角的形状", ["这张桌子是方的"]),
            ("方向，方位", ["他向北方走去"]),
            ("方法，办法", ["他教子有方"])], [], ["圆"]),
    ("空", [("里面没有东西", ["箱子是空的"]),
            ("天空", ["鸟儿飞上高空"]),
            ("没被占用的时间", ["你有空来我家"])], [], ["满"]),
    ("节", [("竹子或植物茎上分段的地方", ["竹子一节一节往上长"]),
            ("节日", ["春节到了"]),
            ("节约，节省", ["我们要节约用水"])], [], []),
    ("张", [("使合拢的东西分开或展开", ["鸟儿张开翅膀"]),
            ("用于纸或桌子等的量词", ["桌上有一张纸"])], [], []),
    ("本", [("草木的根或茎干", ["木本植物很多"]),
            ("原来，本来", ["他本想回家"])], [], ["末"]),
    ("家", [("家庭的住所", ["我回家吃饭"]),
            ("掌握某种专门学识的人", ["他是一位画家"])], [], []),
    ("地", [("地球表面的土层", ["地上有片落叶"]),
            ("地区，地方", ["此地盛产茶叶"])], ["土"], ["天"]),
    ("天", [("地面以上的高空", ["天上飘着白云"]),
            ("一昼夜的时间", ["我等了三天"]),
            ("自然界", ["人定胜天"])], [], ["地"]),
    ("文", [("记录语言的符号", ["甲骨文很古老"]),
            ("柔和，不猛烈", ["她举止文雅"])], [], ["武"]),
    ("角", [("牛羊等头上长出的坚硬东西", ["牛角又长又尖"]),
            ("两个边相接的地方", ["墙角蹲着一只猫"]),
            ("戏剧中演员扮演的人物", ["她在戏中演主角"])], [], []),
    ("通", [("没有阻碍，可以通过", ["这条路走得通"]),
            ("懂得，彻底明白", ["他精通三国语言"]),
            ("传达，使知道", ["请通知大家集合"])], [], []),
    ("管", [("圆筒形的东西", ["厨房的水管坏了"]),
            ("负责，管理", ["他管着三个工人"])], [], []),
    ("朝", [("早晨", ["朝阳照在湖面上"]),
            ("朝代", ["唐朝国力强盛"]),
            ("面对，向着", ["大门朝南开"])], [], []),
    ("兴", [("兴盛，流行", ["国家兴旺发达"]),
            ("对事物喜爱的情绪", ["他对下棋很有兴趣"])], ["盛"], ["衰"]),
    ("病", [("生理或心理上的不健康状态", ["他得了重病"]),
            ("缺点，错误", ["这句话有语病"])], [], []),
    ("故", [("原因，缘故", ["他无故缺席"]),
            ("旧的，原来的", ["他回到了故乡"]),
            ("死亡", ["老人已经病故"])], [], ["新"]),
    ("东西", [("东边和西边", ["这条街东西走向"]),
              ("泛指各种物品", ["我去商店买东西"])], [], []),
    ("地道", [("在地下挖成的通道", ["村民挖了一条地道"]),
              ("真正的，纯粹的", ["这是地道的北京菜"])], [], []),
    ("大意", [("主要的意思", ["请说出这段话的大意"]),
              ("疏忽，不注意", ["他考试时太大意了"])], ["粗心"], ["细心"]),
    ("是非", [("正确和错误", ["我们要明辨是非"]),
              ("口舌纠纷", ["他爱搬弄是非"])], [], []),
    ("意思", [("语言文字的含义", ["这个词是什么意思"]),
              ("表示心意的礼物", ["这是我的一点意思"])], [], []),
    ("先生", [("对老师的称呼", ["先生教我们读书"]),
              ("称别人的丈夫", ["她的先生是医生"])], ["老师"], ["学生"]),
    ("上下", [("从高处到低处的全部", ["他全身上下都是泥"]),
              ("表示数量的大约", ["他四十岁上下"])], [], []),
    ("春秋", [("春季和秋季，泛指一年", ["他已度过七十个春秋"]),
              ("古代编年体史书名", ["孔子修订春秋"])], [], []),
    ("江山", [("江河和山岭", ["江山如画"]),
              ("国家的政权", ["将士们打下一片江山"])], [], []),
    ("光明", [("明亮的光线", ["黑夜过后迎来光明"]),
              ("心地坦白没有私心", ["他为人光明磊落"])], ["明亮"], ["黑暗"]),
    ("文明", [("人类创造的物质和精神财富", ["中华文明源远流长"]),
              ("举止有礼貌，合乎规范", ["请大家文明乘车"])], [], ["野蛮"]),
    ("生意", [("商业经营活动", ["他在城里做生意"]),
              ("富有生命力的气象", ["春来草木有生意"])], [], []),
    ("人家", [("住户", ["山下有几户人家"]),
              ("称别人", ["人家都走了你还不走"])], [], []),
    ("深浅", [("深度", ["不知道河水深浅"]),
              ("说话做事的分寸", ["说话要知道深浅"])], [], []),
]

# (surface, definition, example or None, synonyms, antonyms)
PAIRED = [
    ("美丽", "好看，使人看了产生快感", "山间景色十分美丽", ["漂亮"], ["丑陋"]),
    ("漂亮", "外表好看，样子美观", "她穿了一条漂亮的裙子", ["美丽"], ["难看"]),
    ("丑陋", "相貌或样子难看", "这只怪兽样子丑陋", ["难看"], ["美丽"]),
    ("快乐", "感到幸福或满意", "孩子们过了一个快乐的假期", ["高兴"], ["悲伤"]),
    ("高兴", "愉快而兴奋", "收到礼物他很高兴", ["快乐"], ["难过"]),
    ("悲伤", "伤心难过", "听到噩耗他十分悲伤", ["难过"], ["快乐"]),
    ("难过", "心里不痛快，伤心", "小狗丢了她很难过", ["悲伤"], ["高兴"]),
    ("勇敢", "不怕危险和困难，有胆量", "勇敢的战士冲在前面", ["英勇"], ["胆小"]),
    ("胆小", "胆量小，遇事害怕", "他胆小不敢走夜路", ["怯懦"], ["勇敢"]),
    ("聪明", "智力发达，记忆和理解能力强", "这个孩子很聪明", ["聪慧"], ["愚蠢"]),
    ("愚蠢", "愚笨，不聪明", "这是一个愚蠢的决定", ["愚笨"], ["聪明"]),
    ("勤劳", "努力劳动，不怕辛苦", "农民伯伯十分勤劳", ["勤奋"], ["懒惰"]),
    ("懒惰", "不爱劳动和工作，不勤快", "懒惰的人难有收获", ["懒散"], ["勤劳"]),
    ("安静", "没有声音，没有吵闹", "图书馆里很安静", ["宁静"], ["吵闹"]),
    ("吵闹", "声音杂乱，令人心烦", "集市上吵闹极了", ["喧闹"], ["安静"]),
    ("温暖", "不冷也不太热", "春天的阳光很温暖", ["暖和"], ["寒冷"]),
    ("寒冷", "温度很低，使人感到冷", "北方的冬天很寒冷", ["冰冷"], ["温暖"]),
    ("简单", "结构单纯，头绪少，容易理解", "这道题很简单", ["容易"], ["复杂"]),
    ("复杂", "事物的种类头绪多而杂", "这件事情很复杂", ["繁杂"], ["简单"]),
    ("干净", "没有尘土杂质", "房间打扫得很干净", ["清洁"], ["肮脏"]),
    ("肮脏", "不干净，有污垢", "这条小河变得肮脏", ["污秽"], ["干净"]),
    ("富有", "拥有大量财产", "他家非常富有", ["富裕"], ["贫穷"]),
    ("贫穷", "生活困难，缺少钱财", "那时村里很贫穷", ["贫困"], ["富有"]),
    ("开始", "从头起，着手进行", "新学期开始了", ["起始"], ["结束"]),
    ("结束", "发展或进行到最后阶段，不再继续", "比赛已经结束", ["终止"], ["开始"]),
    ("增加", "在原有基础上加多", "今年的收入增加了", ["增添"], ["减少"]),
    ("减少", "从原有数量中去掉一部分", "河里的鱼减少了", ["削减"], ["增加"]),
    ("成功", "获得预期的结果", "实验终于成功了", ["胜利"], ["失败"]),
    ("失败", "没有达到预定的目的", "这次尝试失败了", ["挫败"], ["成功"]),
    ("坚强", "强固有力，不可动摇", "她有一颗坚强的心", ["刚强"], ["软弱"]),
    ("软弱", "缺乏力气，不坚强", "他性格软弱", ["懦弱"], ["坚强"]),
    ("诚实", "言行跟内心一致，不虚假", "诚实的孩子受人喜爱", ["老实"], ["虚伪"]),
    ("虚伪", "不真实，不实在，作假", "他的笑容很虚伪", ["虚假"], ["诚实"]),
    ("骄傲", "自以为了不起，看不起别人", "取得成绩不要骄傲", ["自满"], ["谦虚"]),
    ("谦虚", "虚心，不夸大自己的能力", "他为人谦虚", ["谦逊"], ["骄傲"]),
    ("热情", "有热烈的感情，待人亲切", "主人热情地招待客人", ["热心"], ["冷淡"]),
    ("冷淡", "不热情，不亲热", "他对我很冷淡", ["冷漠"], ["热情"]),
    ("明亮", "光线充足", "教室宽敞明亮", ["光亮"], ["黑暗"]),
    ("黑暗", "没有光", "山洞里一片黑暗", ["昏暗"], ["明亮"]),
    ("古代", "过去距离现代较远的时代", "古代的人用竹简写字", ["古时"], ["现代"]),
    ("现代", "现在这个时代", "现代的交通很方便", ["当代"], ["古代"]),
    ("朋友", "彼此有交情的人", "我们是多年的朋友", ["友人"], ["敌人"]),
    ("敌人", "敌对的人，仇人", "战士们打败了敌人", ["仇敌"], ["朋友"]),
    ("喜欢", "对人或事物有好感或感兴趣", "我喜欢读诗", ["喜爱"], ["讨厌"]),
    ("讨厌", "厌恶，不喜欢", "他讨厌下雨天", ["厌恶"], ["喜欢"]),
    ("安全", "没有危险，不受威胁", "过马路要注意安全", ["平安"], ["危险"]),
    ("危险", "有遭到损害或失败的可能", "在河边玩耍很危险", ["危急"], ["安全"]),
    ("认真", "严肃对待，不马虎", "他做作业很认真", ["仔细"], ["马虎"]),
    ("马虎", "草率，不细心", "写字不能马虎", ["粗心"], ["认真"]),
    ("仔细", "细心，注意到细节", "请仔细检查一遍", ["细心"], ["粗心"]),
    ("粗心", "疏忽，不细心", "他太粗心把钥匙丢了", ["大意"], ["细心"]),
    ("细心", "用心细密", "护士照顾病人很细心", ["仔细"], ["粗心"]),
    ("友好", "亲近和睦", "两国人民十分友好", ["友善"], ["敌对"]),
    ("坚硬", "非常硬", "这块石头很坚硬", ["刚硬"], ["柔软"]),
    ("柔软", "软和，不坚硬", "小猫的毛很柔软", ["绵软"], ["坚硬"]),
    ("宽阔", "横的距离大，面积大", "门前是一条宽阔的大路", ["宽广"], ["狭窄"]),
    ("狭窄", "宽度小", "巷子十分狭窄", ["窄小"], ["宽阔"]),
    ("进步", "向前发展，比原来好", "他的成绩进步很大", ["提高"], ["退步"]),
    ("退步", "落到比原来差的程度", "这学期他的成绩退步了", ["落后"], ["进步"]),
    ("热闹", "景象繁盛活跃", "过年时街上很热闹", ["繁华"], ["冷清"]),
    ("冷清", "冷静而凄凉，人少不热闹", "雨夜的街道很冷清", ["冷落"], ["热闹"]),
]

# (surface, definition, example or None)
PLAIN = [
    ("山", "地面上由土石构成的高耸部分", "远处有一座山"),
    ("河", "天然或人工的大水道", "村前有一条河"),
    ("日", "太阳", "日出东方"),
    ("月", "夜晚天空中反射日光的星球", "今晚的月很圆"),
    ("雨", "从云层中降向地面的水滴", "一场雨过后空气清新"),
    ("雪", "空中降落的白色冰晶", "窗外飘着雪"),
    ("草", "高等植物中茎干柔软的一类", "羊在山坡上吃草"),
    ("树", "木本植物的通称", "院子里种了一棵树"),
    ("鸟", "有羽毛会飞的卵生动物", "一只鸟落在枝头"),
    ("鱼", "生活在水中用鳃呼吸的脊椎动物", "池塘里游着几条鱼"),
    ("马", "善于奔跑供人骑乘的家畜", "他骑着马穿过草原"),
    ("牛", "反刍家畜，力气大，可耕田", "老牛在田里耕地"),
    ("羊", "头上有角的反刍家畜，毛可织物", "山坡上有一群羊"),
    ("犬", "狗", "犬吠声从村口传来"),
    ("虫", "昆虫和类似昆虫的小动物", "草丛里的虫在鸣叫"),
    ("石", "构成地壳的坚硬物质", "河边有块大石"),
    ("金", "一种黄色有光泽的贵重金属", "这枚戒指是金做的"),
    ("玉", "温润而有光泽的美石", "她戴着一只玉镯"),
    ("土", "地面上的泥沙混合物", "花盆里装满了土"),
    ("田", "种植农作物的土地", "农民在田里插秧"),
    ("米", "稻谷去壳后的子实", "锅里煮着米"),
    ("竹", "茎中空有节的常绿植物", "屋后长着一片竹"),
    ("衣", "穿在身上遮蔽身体的东西", "天冷了要多穿衣"),
    ("车", "陆地上有轮子的运输工具", "路上车很多"),
    ("舟", "船", "一叶小舟漂在江上"),
    ("刀", "用来切割砍削的工具", "厨师磨快了刀"),
    ("弓", "射箭的器械", "猎人拉开了弓"),
    ("门", "房屋或院子的出入口", "请随手关门"),
    ("雷", "云层放电时发出的响声", "远处响起一声雷"),
    ("电", "一种能量，可发光发热", "停电了屋里一片漆黑"),
    ("星", "夜晚天空中发光的天体", "夜空中闪着星"),
    ("云", "空中悬浮的水滴或冰晶聚集体", "天边飘着一朵云"),
    ("海", "靠近大陆比洋小的水域", "他第一次看到海"),
    ("湖", "陆地上积聚的大片水域", "湖上有几只天鹅"),
    ("林", "成片的树木", "鸟儿飞进了林中"),
    ("松", "一种常绿乔木，叶子像针", "山顶长着一棵松"),
    ("桥", "架在水上或空中便于通行的建筑", "河上有座石桥"),
    ("城", "城墙以内的地方，城市", "他每天进城卖菜"),
    ("村", "乡下人聚居的地方", "村里有一口古井"),
    ("路", "地面上供人或车马通行的部分", "这条路通向县城"),
    ("茶", "用茶树嫩叶制成的饮料", "客人来了先泡茶"),
    ("酒", "用粮食或水果发酵制成的含乙醇饮料", "他不喝酒"),
    ("饭", "煮熟的米等谷类食物", "妈妈做好了饭"),
    ("肉", "人或动物体内的柔软组织", "碗里有几块肉"),
    ("眼", "人和动物的视觉器官", "她睁大了眼"),
    ("耳", "人和动物的听觉器官", "兔子的耳很长"),
    ("足", "人或动物的脚", "他赤足走在沙滩上"),
    ("笔", "写字画图的工具", "他用笔写了一封信"),
    ("纸", "用植物纤维制成的薄片，可以写字", "桌上有一叠纸"),
    ("琴", "一种弦乐器", "她每天练琴"),
    ("剑", "古代兵器，长条形两面有刃", "侠客腰间挂着剑"),
    ("钟", "计时的器具", "墙上挂着一面钟"),
    ("灯", "照明的器具", "夜里屋里亮着灯"),
    ("窗", "墙壁上通气透光的装置", "请打开窗透透气"),
    ("床", "供人睡觉的家具", "他早早上床睡觉"),
    ("桌", "上有平面下有支柱的家具", "饭菜摆满了一桌"),
    ("杯", "盛饮料的器具", "他倒了一杯茶"),
    ("碗", "盛饮食的器具，口大底小", "他吃了两碗饭"),
    ("鸡", "一种家禽，公的能报晓", "院子里养了几只鸡"),
    ("猫", "善捉老鼠的家畜", "猫在窗台上睡觉"),
    ("狗", "嗅觉灵敏的家畜，能看门", "小狗摇着尾巴"),
    ("虎", "一种凶猛的大型猫科动物", "山中有虎出没"),
    ("龙", "传说中能兴云降雨的神异动物", "龙舟在江上竞渡"),
    ("熊", "体大笨重的哺乳动物", "熊在树下找蜂蜜"),
    ("梅", "早春开花的落叶乔木", "墙角数枝梅"),
    ("兰", "一种叶子细长开花很香的草本植物", "窗台上摆着一盆兰"),
    ("菊", "秋季开花的草本植物", "秋天园中开满了菊"),
    ("荷", "生长在水中的莲", "池塘里开满了荷"),
    ("桃", "果实多汁味甜的落叶小乔木", "树上结满了桃"),
    ("瓜", "蔓生植物结的果实", "夏天吃瓜解渴"),
    ("豆", "豆类植物的种子", "地里的豆成熟了"),
    ("麦", "一种粮食作物，籽实可磨成面粉", "田里的麦黄了"),
    ("油", "动植物体内的脂肪或矿产的液体", "锅里倒了一点油"),
    ("盐", "有咸味的白色结晶体", "菜里少放盐"),
    ("糖", "有甜味的食物", "孩子喜欢吃糖"),
    ("银", "白色有光泽的贵重金属", "奶奶有一只银手镯"),
    ("铁", "一种常见的灰白色金属", "这口锅是铁做的"),
    ("钱", "货币", "他把钱存进了银行"),
    ("诗", "一种讲究韵律的文学体裁", "他写了一首诗"),
    ("歌", "能唱的作品", "她唱了一首歌"),
]
