//! Prompt bodies for the model-backed tools.

use super::template::PromptTemplate;

pub const TEXT2SQL: &str = "You are a SQL generation assistant. Given several constraints, you need to generate a syntactically correct {dialect} SQL query statement to retrieve target records. In order to generate reasonable queries, you must follow the following rules:

1. Directly generate only SQL query statements, without outputting any explanation or inference information.
2. Directly use \"*\" to retrieve all columns.
3. Use the keyword \"LIMIT\" to limit the maximum number of retrieved records to {max_number}.
4. Carefully construct the where conditions for the query and use the keyword 'LIKE' as much as possible.

Given the following table structure description, only retrieval of that table is allowed:
Table schema: {schema}

Example input:
Product category: Casual pants
Question: What material is the main material for the casual pants you would like to purchase?
Answer: Polyester fiber

Example output:
SQL Query: SELECT * From item WHERE category='Casual pants' AND material LIKE '% polyester fiber%' LIMIT {max_number};

Input:
Product category: {category}
{#history}Question: {question_i}
Answer: {answer_i}
{/history}
SQL Query:";

pub const QUERY_GENERATION: &str = "You are a query generation assistant. Given the user's purchasing demands, you need to generate a short natural language query statement (Query) to retrieve the target product. In order to generate a reasonable query, you must follow the following rules:

1. The generated query should be concise, composed of keywords, and separated by spaces.
2. The generated query should cover all of the user's purchasing requirements.
3. Do not output any explanations or inference information, and do not use unnecessary punctuation such as quotation marks.

Product category: {category}
{#history}Question: {question_i}
Answer: {answer_i}
{/history}
Query:";

pub const QUESTION_GENERATION: &str = "You are a product shopping assistant that can accurately identify user demands, and you are capable of generating three multiple-choice questions for demand clarification. To help you ask valuable questions, here is a summary of statistics about {category}.
Statistics: {statistics}

1. The generated content must focus on the product category ({category}) and contribute to accurately identifying user demands.
2. It is prohibited to generate new questions that are duplicates of previous ones.
3. When constructing options, try to directly select them from the statistical data.

You need to generate new multiple-choice questions for demand clarification based on the historical Q&A. Here is the historical Q&A:

{#history}Question: {question_i}
Answer: {answer_i}
{/history}
The generated result should strictly follow the JSON format, and no additional information should be included.
JSON format description: {json_description}
```json
";

pub const USER_SIMULATOR: &str = "You are in a conversation with a shopping assistant, hoping that they can help you search for suitable products. To provide reasonable answers, you must follow these rules:
1. You must answer the question accurately based on the target product.
2. Try to use the options provided for your answer, if your answer is not covered by the options, simply answer \"Other\".
3. Directly output the answer, do not provide any explanation or reasoning information and avoid unnecessary punctuation like quotation marks.
4. Each question's answer should be on a separate line.

Here is the target product information: {item}

Here is the official question from the assistant: {questions}

Answer the above question directly, do not repeat the question, **each answer should be on a separate line**.";

pub const DOC2QUERY: &str = "You write search queries for an online shop. Read the product record below and write the short keyword query a shopper who wants exactly this product would type into the search box. Use only words supported by the record, separate keywords with spaces, and output the query alone.

Product record: {item}

Query:";

/// Description bound to `{json_description}` for question generation.
pub const QUESTION_JSON_DESCRIPTION: &str = "a JSON array of question objects, each with \"facet\" (one of: brand, series, target_customer, applicable_scenario, decorative_attribute, material, style, specification, color, function), \"question\" (the question text) and \"candidates\" (at most five answer options taken from the statistics; \"Other\" is added automatically)";

/// All built-in templates, parsed.
#[derive(Debug, Clone)]
pub struct PromptSet {
    pub text2sql: PromptTemplate,
    pub query_generation: PromptTemplate,
    pub question_generation: PromptTemplate,
    pub user_simulator: PromptTemplate,
    pub doc2query: PromptTemplate,
}

impl Default for PromptSet {
    fn default() -> Self {
        let parse = |name: &str, body: &str| PromptTemplate::new(name, body).expect("built-in template parses");
        PromptSet {
            text2sql: parse("text2sql", TEXT2SQL),
            query_generation: parse("query_generation", QUERY_GENERATION),
            question_generation: parse("question_generation", QUESTION_GENERATION),
            user_simulator: parse("user_simulator", USER_SIMULATOR),
            doc2query: parse("doc2query", DOC2QUERY),
        }
    }
}
